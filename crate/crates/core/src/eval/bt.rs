use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::votes::ItemVotes;
use crate::error::{Error, Result};
use crate::numerics::sigmoid;

const STEP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BtOptions {
    pub max_iter: usize,
    /// Stop once the gradient's Euclidean norm falls to this value.
    pub tol: f64,
}

impl Default for BtOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-8,
        }
    }
}

/// Fitted Bradley-Terry regression.
///
/// Item `i` compares models `a` and `b` in group `g`; each model's output
/// falls in one covariate bin. The latent quality of model `m` on the item is
/// `offset[m] + coef[g][bin_m]`, and A is preferred with probability
/// `σ(z_a - z_b)`. The first model's offset and every group's bin-0
/// coefficient are fixed at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtModel {
    pub models: Vec<String>,
    pub groups: Vec<String>,
    pub bins: usize,
    pub offsets: Vec<f64>,
    /// `coefs[g][r]` for group `g` and bin `r`.
    pub coefs: Vec<Vec<f64>>,
    /// Log-likelihood before each Newton step and at the optimum.
    pub log_likelihood: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
}

impl BtModel {
    /// Log-odds of preferring an output in bin `r` over one in bin `r2`
    /// within group `g`, all else equal.
    pub fn log_odds(&self, g: usize, r: usize, r2: usize) -> f64 {
        self.coefs[g][r] - self.coefs[g][r2]
    }

    pub fn offset_of(&self, model: &str) -> Option<f64> {
        self.models.iter().position(|m| m == model).map(|i| self.offsets[i])
    }
}

/// One comparison reduced to its design row and vote totals.
struct Row {
    features: Vec<(usize, f64)>,
    wins_a: f64,
    votes: f64,
}

struct Design {
    models: Vec<String>,
    groups: Vec<String>,
    bins: usize,
    rows: Vec<Row>,
    n_params: usize,
}

impl Design {
    fn offset_param(&self, m: usize) -> Option<usize> {
        m.checked_sub(1)
    }

    fn coef_param(&self, g: usize, r: usize) -> Option<usize> {
        r.checked_sub(1)
            .map(|r| self.models.len() - 1 + g * (self.bins - 1) + r)
    }
}

fn sorted_unique<'a>(names: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut v: Vec<String> = names.map(str::to_owned).collect();
    v.sort();
    v.dedup();
    v
}

fn build_design(items: &[ItemVotes]) -> Result<Design> {
    if items.is_empty() {
        return Err(Error::EmptyInput("items"));
    }
    for it in items {
        it.validate()?;
        if it.model_a.is_empty() || it.model_b.is_empty() || it.model_a == it.model_b {
            return Err(Error::invalid(format!("item `{}` needs two distinct models", it.item_id)));
        }
    }
    let with_bins = items.iter().filter(|i| i.bin_a.is_some() && i.bin_b.is_some()).count();
    let any_bin = items.iter().any(|i| i.bin_a.is_some() || i.bin_b.is_some());
    if any_bin && with_bins != items.len() {
        return Err(Error::invalid("either every item has bin_a and bin_b or none does"));
    }
    let bins = if any_bin {
        items.iter().flat_map(|i| [i.bin_a.unwrap_or(0), i.bin_b.unwrap_or(0)]).max().unwrap_or(0) + 1
    } else {
        1
    };

    let models = sorted_unique(items.iter().flat_map(|i| [i.model_a.as_str(), i.model_b.as_str()]));
    let groups = sorted_unique(items.iter().map(|i| i.group.as_deref().unwrap_or("all")));
    let model_ix: BTreeMap<&str, usize> = models.iter().enumerate().map(|(i, m)| (m.as_str(), i)).collect();
    let group_ix: BTreeMap<&str, usize> = groups.iter().enumerate().map(|(i, g)| (g.as_str(), i)).collect();

    let mut design = Design {
        n_params: models.len() - 1 + groups.len() * (bins - 1),
        models: models.clone(),
        groups: groups.clone(),
        bins,
        rows: Vec::with_capacity(items.len()),
    };
    for it in items {
        let (a, b) = (model_ix[it.model_a.as_str()], model_ix[it.model_b.as_str()]);
        let g = group_ix[it.group.as_deref().unwrap_or("all")];
        let mut dense: BTreeMap<usize, f64> = BTreeMap::new();
        let mut add = |p: Option<usize>, v: f64| {
            if let Some(p) = p {
                *dense.entry(p).or_insert(0.0) += v;
            }
        };
        add(design.offset_param(a), 1.0);
        add(design.offset_param(b), -1.0);
        add(design.coef_param(g, it.bin_a.unwrap_or(0)), 1.0);
        add(design.coef_param(g, it.bin_b.unwrap_or(0)), -1.0);
        let wins_a = it.votes.iter().map(|&v| (f64::from(v) + 1.0) / 2.0).sum();
        design.rows.push(Row {
            features: dense.into_iter().filter(|(_, v)| *v != 0.0).collect(),
            wins_a,
            votes: it.votes.len() as f64,
        });
    }
    Ok(design)
}

fn log_likelihood(design: &Design, beta: &[f64]) -> f64 {
    design
        .rows
        .iter()
        .map(|r| {
            let d: f64 = r.features.iter().map(|&(p, v)| beta[p] * v).sum();
            r.wins_a * sigmoid(d).ln() + (r.votes - r.wins_a) * sigmoid(-d).ln()
        })
        .sum()
}

/// Maximum-likelihood Bradley-Terry regression over vote items.
///
/// Ties count as half a win for each side. Items without a `group` share the
/// group `"all"`; items without bins fit per-model offsets only. Newton steps
/// with backtracking keep the log-likelihood non-decreasing.
pub fn bt_fit(items: &[ItemVotes], opts: &BtOptions) -> Result<BtModel> {
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tol must be > 0"));
    }
    let design = build_design(items)?;
    let k = design.n_params;
    let mut beta = vec![0.0; k];
    let mut trace = Vec::new();
    let mut grad_norm;
    let mut iterations = 0;
    loop {
        let mut g = DVector::<f64>::zeros(k);
        let mut h = DMatrix::<f64>::zeros(k, k);
        for r in &design.rows {
            let d: f64 = r.features.iter().map(|&(p, v)| beta[p] * v).sum();
            let p = sigmoid(d);
            let resid = r.wins_a - r.votes * p;
            let curv = r.votes * p * (1.0 - p);
            for &(i, vi) in &r.features {
                g[i] += resid * vi;
                for &(j, vj) in &r.features {
                    h[(i, j)] += curv * vi * vj;
                }
            }
        }
        let ll = log_likelihood(&design, &beta);
        trace.push(ll);
        grad_norm = g.norm();
        let step = h.cholesky().ok_or(Error::RankDeficient)?.solve(&g);
        // A small gradient alone is not enough: on separated data the
        // likelihood flattens toward its supremum while the Newton step stays
        // near one unit, so convergence also requires a vanishing step.
        if grad_norm <= opts.tol && step.amax() <= STEP_TOL {
            break;
        }
        if iterations == opts.max_iter {
            return Err(Error::NonConvergence { iterations, grad_norm });
        }
        iterations += 1;
        let mut alpha = 1.0;
        loop {
            let trial: Vec<f64> = beta.iter().zip(step.iter()).map(|(b, s)| b + alpha * s).collect();
            if log_likelihood(&design, &trial) >= ll {
                beta = trial;
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-12 {
                return Err(Error::NonConvergence { iterations, grad_norm });
            }
        }
    }

    let mut offsets = vec![0.0; design.models.len()];
    for (m, o) in offsets.iter_mut().enumerate() {
        if let Some(p) = design.offset_param(m) {
            *o = beta[p];
        }
    }
    let coefs = (0..design.groups.len())
        .map(|g| {
            (0..design.bins)
                .map(|r| design.coef_param(g, r).map_or(0.0, |p| beta[p]))
                .collect()
        })
        .collect();
    Ok(BtModel {
        models: design.models,
        groups: design.groups,
        bins: design.bins,
        offsets,
        coefs,
        log_likelihood: trace,
        iterations,
        grad_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{elo_fit, BattleRecord, EloOptions, Outcome, ELO_PER_NAT};
    use crate::numerics::Rng;

    fn vote(a: &str, b: &str, votes: Vec<i8>) -> ItemVotes {
        ItemVotes {
            model_a: a.into(),
            model_b: b.into(),
            ..ItemVotes::new("i", votes)
        }
    }

    fn binned(a: &str, b: &str, group: &str, bins: (usize, usize), votes: Vec<i8>) -> ItemVotes {
        ItemVotes {
            group: Some(group.into()),
            bin_a: Some(bins.0),
            bin_b: Some(bins.1),
            ..vote(a, b, votes)
        }
    }

    #[test]
    fn two_models_match_elo_strengths() {
        let mut items = vec![];
        let mut battles = vec![];
        for (votes, outcome, n) in [(vec![1], Outcome::WinA, 7), (vec![-1], Outcome::WinB, 4), (vec![0], Outcome::Tie, 3)] {
            for _ in 0..n {
                items.push(vote("A", "B", votes.clone()));
                battles.push(BattleRecord::new("A", "B", outcome));
            }
        }
        let bt = bt_fit(&items, &BtOptions::default()).unwrap();
        let elo = elo_fit(
            &battles,
            &EloOptions {
                ridge: 0.0,
                ..EloOptions::default()
            },
        )
        .unwrap();
        let elo_gap = (elo["B"] - elo["A"]) / ELO_PER_NAT;
        assert!((bt.offset_of("B").unwrap() - elo_gap).abs() < 1e-9);
        assert_eq!(bt.offset_of("A"), Some(0.0));
    }

    #[test]
    fn balanced_votes_give_zero_coefficients() {
        let mut items = vec![];
        for g in ["x", "y"] {
            for (ba, bb) in [(0, 1), (1, 2), (2, 0), (1, 0), (2, 1), (0, 2)] {
                items.push(binned("A", "B", g, (ba, bb), vec![1, -1]));
                items.push(binned("B", "C", g, (ba, bb), vec![0]));
                items.push(binned("C", "A", g, (ba, bb), vec![-1, 1, 0]));
            }
        }
        let bt = bt_fit(&items, &BtOptions::default()).unwrap();
        assert!(bt.offsets.iter().all(|o| o.abs() < 1e-12), "{:?}", bt.offsets);
        assert!(bt.coefs.iter().flatten().all(|c| c.abs() < 1e-12), "{:?}", bt.coefs);
        assert_eq!(bt.iterations, 0);
    }

    #[test]
    fn log_likelihood_never_decreases() {
        let mut rng = Rng::from_seed(4);
        let items: Vec<ItemVotes> = (0..300)
            .map(|_| {
                let v = if rng.uniform() < 0.8 { 1 } else { -1 };
                binned("A", "B", "all", (rng.below(3), rng.below(3)), vec![v])
            })
            .collect();
        let bt = bt_fit(&items, &BtOptions::default()).unwrap();
        assert!(bt.log_likelihood.windows(2).all(|w| w[1] >= w[0]));
        assert!(bt.grad_norm <= 1e-8);
        assert!(bt.iterations > 1);
    }

    #[test]
    fn recovers_synthetic_coefficients() {
        // Orientation and bin contrast are drawn independently and balanced,
        // so the two free parameters are estimated from orthogonal features.
        let (offset_b, coef1) = (0.4, -0.6);
        let mut rng = Rng::from_seed(2024);
        let items: Vec<ItemVotes> = (0..10_000)
            .map(|_| {
                let swap = rng.below(2) == 1;
                let bin_a = rng.below(2);
                let (a, b) = if swap { ("B", "A") } else { ("A", "B") };
                let z = |m: &str, bin: usize| (if m == "B" { offset_b } else { 0.0 }) + if bin == 1 { coef1 } else { 0.0 };
                let p = sigmoid(z(a, bin_a) - z(b, 1 - bin_a));
                let v = if rng.uniform() < p { 1 } else { -1 };
                binned(a, b, "all", (bin_a, 1 - bin_a), vec![v])
            })
            .collect();
        let bt = bt_fit(&items, &BtOptions::default()).unwrap();
        assert!((bt.offset_of("B").unwrap() - offset_b).abs() < 0.05, "{:?}", bt.offsets);
        assert!((bt.log_odds(0, 1, 0) - coef1).abs() < 0.05, "{:?}", bt.coefs);
    }

    #[test]
    fn separated_data_does_not_converge() {
        let items: Vec<ItemVotes> = (0..10).map(|_| vote("A", "B", vec![1])).collect();
        match bt_fit(&items, &BtOptions { max_iter: 50, tol: 1e-8 }) {
            Err(Error::NonConvergence { iterations, .. }) => assert_eq!(iterations, 50),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unidentifiable_bins_are_rank_deficient() {
        // Bin 2 never appears against anything but itself.
        let items = vec![
            binned("A", "B", "all", (0, 1), vec![1, -1]),
            binned("A", "B", "all", (1, 0), vec![1, -1]),
            binned("B", "A", "all", (2, 2), vec![1, -1]),
        ];
        assert!(matches!(bt_fit(&items, &BtOptions::default()), Err(Error::RankDeficient)));
    }

    #[test]
    fn input_errors() {
        assert!(bt_fit(&[], &BtOptions::default()).is_err());
        assert!(bt_fit(&[vote("A", "A", vec![1])], &BtOptions::default()).is_err());
        let mixed = vec![binned("A", "B", "all", (0, 1), vec![1]), vote("A", "B", vec![-1])];
        assert!(bt_fit(&mixed, &BtOptions::default()).is_err());
    }
}
