use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{fsum, Rng};

/// Preferences collected for one A/B item: `+1` prefers model A, `-1`
/// prefers model B, `0` is a tie.
///
/// `group`, `bin_a` and `bin_b` are optional covariates used by the
/// Bradley-Terry regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemVotes {
    pub item_id: String,
    #[serde(default)]
    pub model_a: String,
    #[serde(default)]
    pub model_b: String,
    pub votes: Vec<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin_a: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin_b: Option<usize>,
}

impl ItemVotes {
    pub fn new(item_id: impl Into<String>, votes: Vec<i8>) -> Self {
        Self {
            item_id: item_id.into(),
            model_a: String::new(),
            model_b: String::new(),
            votes,
            group: None,
            bin_a: None,
            bin_b: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.votes.is_empty() {
            return Err(Error::invalid(format!("item `{}` has no votes", self.item_id)));
        }
        if let Some(v) = self.votes.iter().find(|v| !(-1..=1).contains(*v)) {
            return Err(Error::invalid(format!("item `{}` has vote {v}; expected -1, 0 or 1", self.item_id)));
        }
        Ok(())
    }

    /// The same item seen from the other side: models, bins and votes swap.
    pub fn swapped(&self) -> Self {
        Self {
            model_a: self.model_b.clone(),
            model_b: self.model_a.clone(),
            votes: self.votes.iter().map(|v| -v).collect(),
            bin_a: self.bin_b,
            bin_b: self.bin_a,
            ..self.clone()
        }
    }
}

/// Mean preference over the item's votes, in `[-1, 1]`.
pub fn consensus(item: &ItemVotes) -> Result<f64> {
    item.validate()?;
    Ok(fsum(item.votes.iter().map(|&v| f64::from(v))) / item.votes.len() as f64)
}

/// Majority label over the votes; `0` when no label has a strict majority
/// over each of the others.
pub fn majority_vote(item: &ItemVotes) -> Result<i8> {
    item.validate()?;
    let count = |label: i8| item.votes.iter().filter(|&&v| v == label).count();
    let (a, tie, b) = (count(1), count(0), count(-1));
    Ok(if a > tie && a > b {
        1
    } else if b > tie && b > a {
        -1
    } else {
        0
    })
}

/// Linear Likert map: level `k` in `1..=5` becomes `20·k` percent.
pub fn likert_to_percent(level: u8) -> Result<f64> {
    if !(1..=5).contains(&level) {
        return Err(Error::invalid(format!("Likert level {level} outside 1..=5")));
    }
    Ok(20.0 * f64::from(level))
}

/// Net win rate in percent: `100 ×` the mean consensus score.
pub fn net_win_rate(scores: &[f64]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("consensus scores"));
    }
    Ok(100.0 * (fsum(scores.iter().copied()) / scores.len() as f64))
}

/// Linear interpolation between order statistics: the `q`-quantile of
/// ascending `sorted` sits at position `q·(n-1)`.
pub fn percentile(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptyInput("percentile sample"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!("quantile {q} outside [0, 1]")));
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    Ok(if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    })
}

pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 1000;

/// 95% percentile bootstrap interval of the net win rate.
///
/// Resample `b` draws its item indices from `rng.fork(b)`, so the interval
/// depends only on the scores, the resample count and `rng`'s seed and stream.
pub fn bootstrap_ci(scores: &[f64], resamples: usize, rng: &Rng) -> Result<(f64, f64)> {
    if scores.len() < 2 {
        return Err(Error::invalid(format!("bootstrap needs >= 2 items, got {}", scores.len())));
    }
    if resamples == 0 {
        return Err(Error::invalid("bootstrap needs >= 1 resample"));
    }
    let n = scores.len();
    let mut stats: Vec<f64> = (0..resamples)
        .map(|b| {
            let mut r = rng.fork(b as u64);
            let draw: Vec<f64> = (0..n).map(|_| scores[r.below(n)]).collect();
            net_win_rate(&draw)
        })
        .collect::<Result<_>>()?;
    stats.sort_by(f64::total_cmp);
    Ok((percentile(&stats, 0.025)?, percentile(&stats, 0.975)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignificanceBand {
    Significant,
    Moderate,
    OnPar,
}

impl SignificanceBand {
    pub fn as_str(self) -> &'static str {
        match self {
            SignificanceBand::Significant => "significant",
            SignificanceBand::Moderate => "moderate",
            SignificanceBand::OnPar => "on_par",
        }
    }
}

/// `|nwt| > 2σ` is significant, `σ < |nwt| ≤ 2σ` moderate, anything
/// smaller on par.
pub fn significance_band(nwt: f64, sigma: f64) -> Result<SignificanceBand> {
    if !(sigma > 0.0) || !sigma.is_finite() || !nwt.is_finite() {
        return Err(Error::invalid(format!("need finite nwt and sigma > 0 (got {nwt}, {sigma})")));
    }
    let m = nwt.abs();
    Ok(if m > 2.0 * sigma {
        SignificanceBand::Significant
    } else if m > sigma {
        SignificanceBand::Moderate
    } else {
        SignificanceBand::OnPar
    })
}
