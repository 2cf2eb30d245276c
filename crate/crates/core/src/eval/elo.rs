use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::sigmoid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    WinA,
    Tie,
    WinB,
}

impl Outcome {
    /// Score for model A: 1, 1/2 or 0.
    pub fn score_a(self) -> f64 {
        match self {
            Outcome::WinA => 1.0,
            Outcome::Tie => 0.5,
            Outcome::WinB => 0.0,
        }
    }
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BattleRecord {
    pub model_a: String,
    pub model_b: String,
    pub outcome: Outcome,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

impl BattleRecord {
    pub fn new(a: &str, b: &str, outcome: Outcome) -> Self {
        Self {
            model_a: a.into(),
            model_b: b.into(),
            outcome,
            weight: 1.0,
        }
    }
}

pub const ELO_MEAN: f64 = 1000.0;
/// Elo points per natural-log unit of strength: `400 / ln 10`.
pub const ELO_PER_NAT: f64 = 400.0 / std::f64::consts::LN_10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EloOptions {
    /// Gaussian prior precision on log-strengths. Keeps the estimate finite
    /// when one model wins every comparison; zero gives the plain MLE.
    pub ridge: f64,
    pub max_iter: usize,
    /// Stop once the gradient's max-norm falls to this value.
    pub tol: f64,
}

impl Default for EloOptions {
    fn default() -> Self {
        Self {
            ridge: 1e-2,
            max_iter: 200,
            tol: 1e-10,
        }
    }
}

/// Pairwise win totals (ties split evenly) and comparison weights over a
/// sorted model roster.
#[derive(Debug, Clone)]
pub(crate) struct PairTable {
    pub models: Vec<String>,
    /// `wins[i][j]`: weighted score of `i` against `j`.
    pub wins: Vec<Vec<f64>>,
}

impl PairTable {
    pub fn count(&self, i: usize, j: usize) -> f64 {
        self.wins[i][j] + self.wins[j][i]
    }
}

pub(crate) fn pair_table(roster: &[String], battles: &[BattleRecord]) -> Result<PairTable> {
    let mut models: Vec<String> = roster.to_vec();
    for b in battles {
        if b.model_a == b.model_b {
            return Err(Error::invalid(format!("battle of `{}` against itself", b.model_a)));
        }
        if !(b.weight > 0.0) || !b.weight.is_finite() {
            return Err(Error::invalid(format!("battle weight {} must be positive", b.weight)));
        }
        models.push(b.model_a.clone());
        models.push(b.model_b.clone());
    }
    models.sort();
    models.dedup();
    if models.is_empty() {
        return Err(Error::EmptyInput("battles"));
    }
    let index: BTreeMap<&str, usize> = models.iter().enumerate().map(|(i, m)| (m.as_str(), i)).collect();
    let n = models.len();
    let mut wins = vec![vec![0.0; n]; n];
    for b in battles {
        let (i, j) = (index[b.model_a.as_str()], index[b.model_b.as_str()]);
        let s = b.outcome.score_a();
        wins[i][j] += b.weight * s;
        wins[j][i] += b.weight * (1.0 - s);
    }
    let table = PairTable {
        models: models.clone(),
        wins,
    };
    if let Some(lonely) = (0..n).find(|&i| (0..n).all(|j| table.count(i, j) == 0.0)) {
        return Err(Error::NoComparisons(models[lonely].clone()));
    }
    let components = components(&table);
    if components.len() > 1 {
        return Err(Error::Disconnected { components });
    }
    Ok(table)
}

/// Connected components of the comparison graph, each listed by model name.
fn components(table: &PairTable) -> Vec<Vec<String>> {
    let n = table.models.len();
    let mut label = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![start];
        label[start] = id;
        let mut members = Vec::new();
        while let Some(i) = stack.pop() {
            members.push(i);
            for (j, l) in label.iter_mut().enumerate() {
                if *l == usize::MAX && table.count(i, j) > 0.0 {
                    *l = id;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        out.push(members.into_iter().map(|i| table.models[i].clone()).collect());
    }
    out
}

/// Penalized Bradley-Terry log-likelihood of log-strengths `theta`.
pub(crate) fn bt_log_likelihood(table: &PairTable, theta: &[f64], ridge: f64) -> f64 {
    let n = theta.len();
    let mut ll = -0.5 * ridge * theta.iter().map(|t| t * t).sum::<f64>();
    for i in 0..n {
        for j in 0..n {
            let w = table.wins[i][j];
            if w > 0.0 {
                ll += w * sigmoid(theta[i] - theta[j]).ln();
            }
        }
    }
    ll
}

/// Maximizes the (penalized) Bradley-Terry likelihood by Newton's method.
/// The result is centered to mean zero.
pub(crate) fn fit_log_strengths(table: &PairTable, opts: &EloOptions) -> Result<Vec<f64>> {
    if !(opts.ridge >= 0.0) || !(opts.tol > 0.0) {
        return Err(Error::invalid("ridge must be >= 0 and tol > 0"));
    }
    let n = table.models.len();
    let mut theta = vec![0.0; n];
    // Without a prior the likelihood is flat along a common shift; pin model 0.
    let free: Vec<usize> = if opts.ridge > 0.0 { (0..n).collect() } else { (1..n).collect() };
    let mut grad_norm = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let mut g = vec![0.0; n];
        let mut h = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            g[i] -= opts.ridge * theta[i];
            h[(i, i)] += opts.ridge;
            for j in 0..n {
                let c = table.count(i, j);
                if i == j || c == 0.0 {
                    continue;
                }
                let p = sigmoid(theta[i] - theta[j]);
                g[i] += table.wins[i][j] - c * p;
                let curv = c * p * (1.0 - p);
                h[(i, i)] += curv;
                h[(i, j)] -= curv;
            }
        }
        grad_norm = free.iter().map(|&i| g[i].abs()).fold(0.0, f64::max);
        if grad_norm <= opts.tol {
            let mean = theta.iter().sum::<f64>() / n as f64;
            return Ok(theta.iter().map(|t| t - mean).collect());
        }
        let hr = DMatrix::from_fn(free.len(), free.len(), |a, b| h[(free[a], free[b])]);
        let gr = DVector::from_iterator(free.len(), free.iter().map(|&i| g[i]));
        let step = hr.cholesky().ok_or(Error::RankDeficient)?.solve(&gr);

        let base = bt_log_likelihood(table, &theta, opts.ridge);
        let mut alpha = 1.0;
        loop {
            let mut trial = theta.clone();
            for (k, &i) in free.iter().enumerate() {
                trial[i] += alpha * step[k];
            }
            if bt_log_likelihood(table, &trial, opts.ridge) >= base || alpha < 1e-10 {
                theta = trial;
                break;
            }
            alpha *= 0.5;
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        grad_norm,
    })
}

/// Elo ratings from battle records via Bradley-Terry maximum likelihood.
///
/// Ties count as half a win for each side. Ratings are
/// `1000 + 400·log10(strength)` with log-strengths centered, so the mean
/// rating is exactly 1000 up to rounding and the result does not depend on
/// battle order.
pub fn elo_fit(battles: &[BattleRecord], opts: &EloOptions) -> Result<BTreeMap<String, f64>> {
    elo_fit_roster(&[], battles, opts)
}

/// As [`elo_fit`], additionally requiring every model in `roster` to appear.
pub fn elo_fit_roster(roster: &[String], battles: &[BattleRecord], opts: &EloOptions) -> Result<BTreeMap<String, f64>> {
    let table = pair_table(roster, battles)?;
    let theta = fit_log_strengths(&table, opts)?;
    Ok(table
        .models
        .into_iter()
        .zip(theta)
        .map(|(m, t)| (m, ELO_MEAN + ELO_PER_NAT * t))
        .collect())
}

pub const DEFAULT_ELO_K: f64 = 4.0;

/// Classic sequential Elo: every model starts at 1000 and each battle moves
/// both ratings by `k·weight·(score - expected)`. Depends on battle order.
pub fn elo_sequential(battles: &[BattleRecord], k: f64) -> Result<BTreeMap<String, f64>> {
    let mut ratings: BTreeMap<String, f64> = BTreeMap::new();
    for b in battles {
        if b.model_a == b.model_b {
            return Err(Error::invalid(format!("battle of `{}` against itself", b.model_a)));
        }
        let ra = *ratings.entry(b.model_a.clone()).or_insert(ELO_MEAN);
        let rb = *ratings.entry(b.model_b.clone()).or_insert(ELO_MEAN);
        let expected = 1.0 / (1.0 + 10f64.powf((rb - ra) / 400.0));
        let delta = k * b.weight * (b.outcome.score_a() - expected);
        *ratings.get_mut(&b.model_a).expect("inserted") += delta;
        *ratings.get_mut(&b.model_b).expect("inserted") -= delta;
    }
    if ratings.is_empty() {
        return Err(Error::EmptyInput("battles"));
    }
    Ok(ratings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;
    use proptest::prelude::*;
    use Outcome::*;

    fn battles(spec: &[(&str, &str, Outcome, usize)]) -> Vec<BattleRecord> {
        spec.iter()
            .flat_map(|&(a, b, o, n)| std::iter::repeat_n(BattleRecord::new(a, b, o), n))
            .collect()
    }

    #[test]
    fn symmetric_record_is_even() {
        let b = battles(&[("A", "B", WinA, 5), ("A", "B", WinB, 5), ("A", "B", Tie, 2)]);
        let r = elo_fit(&b, &EloOptions::default()).unwrap();
        assert_eq!(r["A"], 1000.0);
        assert_eq!(r["B"], 1000.0);
    }

    #[test]
    fn sweep_ranks_winner_first() {
        let b = battles(&[("A", "B", WinA, 10)]);
        let r = elo_fit(&b, &EloOptions::default()).unwrap();
        assert!(r["A"] > r["B"]);
        assert!(r["A"].is_finite());
        assert!(((r["A"] + r["B"]) / 2.0 - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn unpenalized_matches_closed_form() {
        // Two models: the MLE log-odds is ln(w_A / w_B).
        let b = battles(&[("A", "B", WinA, 7), ("B", "A", WinA, 3)]);
        let opts = EloOptions {
            ridge: 0.0,
            ..EloOptions::default()
        };
        let r = elo_fit(&b, &opts).unwrap();
        let expect = ELO_PER_NAT * (7.0f64 / 3.0).ln();
        assert!((r["A"] - r["B"] - expect).abs() < 1e-9);
    }

    #[test]
    fn three_models_match_grid_oracle() {
        // A>B, B>C, A>C with some upsets so the unpenalized MLE is finite.
        let b = battles(&[
            ("A", "B", WinA, 6),
            ("A", "B", WinB, 2),
            ("B", "C", WinA, 6),
            ("B", "C", WinB, 2),
            ("A", "C", WinA, 7),
            ("A", "C", WinB, 1),
        ]);
        let opts = EloOptions {
            ridge: 0.0,
            ..EloOptions::default()
        };
        let r = elo_fit(&b, &opts).unwrap();
        assert!(r["A"] > r["B"] && r["B"] > r["C"]);

        // Brute-force maximization over (θ_A, θ_C) with θ_B = 0.
        let table = pair_table(&[], &b).unwrap();
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        let grid = |k: i32| k as f64 * 0.01;
        for ia in 0..=300 {
            for ic in -300..=0 {
                let ll = bt_log_likelihood(&table, &[grid(ia), 0.0, grid(ic)], 0.0);
                if ll > best.0 {
                    best = (ll, grid(ia), grid(ic));
                }
            }
        }
        let fit_a = (r["A"] - r["B"]) / ELO_PER_NAT;
        let fit_c = (r["C"] - r["B"]) / ELO_PER_NAT;
        assert!((fit_a - best.1).abs() <= 0.01, "{fit_a} vs {}", best.1);
        assert!((fit_c - best.2).abs() <= 0.01, "{fit_c} vs {}", best.2);
    }

    #[test]
    fn disconnected_names_components() {
        let b = battles(&[("A", "B", WinA, 1), ("C", "D", Tie, 1)]);
        match elo_fit(&b, &EloOptions::default()) {
            Err(Error::Disconnected { components }) => {
                assert_eq!(components, vec![vec!["A".to_string(), "B".into()], vec!["C".into(), "D".into()]]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn roster_model_without_battles() {
        let b = battles(&[("A", "B", WinA, 1)]);
        let roster = vec!["Z".to_string()];
        assert!(matches!(
            elo_fit_roster(&roster, &b, &EloOptions::default()),
            Err(Error::NoComparisons(m)) if m == "Z"
        ));
        assert!(elo_fit(&[], &EloOptions::default()).is_err());
        assert!(elo_fit(&battles(&[("A", "A", Tie, 1)]), &EloOptions::default()).is_err());
    }

    #[test]
    fn sequential_elo_moves_by_k() {
        let r = elo_sequential(&battles(&[("A", "B", WinA, 1)]), 4.0).unwrap();
        assert_eq!(r["A"], 1002.0);
        assert_eq!(r["B"], 998.0);
    }

    proptest! {
        #[test]
        fn ranking_ignores_battle_order(seed in any::<u64>()) {
            let mut rng = Rng::from_seed(seed);
            let names = ["A", "B", "C", "D"];
            let mut b: Vec<BattleRecord> = (0..40)
                .map(|_| {
                    let i = rng.below(4);
                    let j = (i + 1 + rng.below(3)) % 4;
                    let o = [WinA, Tie, WinB][rng.below(3)];
                    BattleRecord::new(names[i], names[j], o)
                })
                .collect();
            let Ok(fwd) = elo_fit(&b, &EloOptions::default()) else { return Ok(()) };
            // Fisher-Yates shuffle.
            for i in (1..b.len()).rev() {
                b.swap(i, rng.below(i + 1));
            }
            let back = elo_fit(&b, &EloOptions::default()).unwrap();
            let order = |r: &BTreeMap<String, f64>| {
                let mut v: Vec<(&String, &f64)> = r.iter().collect();
                v.sort_by(|x, y| y.1.total_cmp(x.1).then(x.0.cmp(y.0)));
                v.into_iter().map(|(m, _)| m.clone()).collect::<Vec<_>>()
            };
            for (m, v) in &fwd {
                prop_assert!((v - back[m]).abs() < 1e-6);
            }
            prop_assert_eq!(order(&fwd), order(&back));
            let mean = fwd.values().sum::<f64>() / fwd.len() as f64;
            prop_assert!((mean - 1000.0).abs() < 1e-9);
        }

        #[test]
        fn shifting_strengths_keeps_probabilities(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -5.0f64..5.0) {
            let p = sigmoid(a - b);
            let q = sigmoid((a + c) - (b + c));
            prop_assert!((p - q).abs() < 1e-12);
        }
    }
}
