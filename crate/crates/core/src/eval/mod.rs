//! Pairwise evaluation statistics: consensus scores, net win rate with
//! bootstrap intervals and significance bands, Elo ratings from battles, and
//! Bradley-Terry regression with binned covariates.

mod bt;
mod elo;
mod io;
mod votes;

pub use bt::{bt_fit, BtModel, BtOptions};
pub use elo::{
    elo_fit, elo_fit_roster, elo_sequential, BattleRecord, EloOptions, Outcome, DEFAULT_ELO_K, ELO_MEAN,
    ELO_PER_NAT,
};
pub use io::{read_battles_jsonl, read_jsonl, read_votes_jsonl};
pub use votes::{
    bootstrap_ci, consensus, likert_to_percent, majority_vote, net_win_rate, percentile, significance_band,
    ItemVotes, SignificanceBand, DEFAULT_BOOTSTRAP_RESAMPLES,
};
