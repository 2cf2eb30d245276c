use crate::error::{Error, Result};

/// Strictly increasing time knots from 0 to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSchedule {
    knots: Vec<f64>,
}

impl TimeSchedule {
    pub fn new(knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidSchedule("need at least two knots".into()));
        }
        if knots[0] != 0.0 || *knots.last().unwrap() != 1.0 {
            return Err(Error::InvalidSchedule("knots must start at 0 and end at 1".into()));
        }
        if let Some(i) = knots.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidSchedule(format!(
                "knots not strictly increasing at index {i}"
            )));
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of solver steps (knots minus one).
    pub fn steps(&self) -> usize {
        self.knots.len() - 1
    }

    /// `(t_i, t_{i+1})` pairs.
    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.knots.windows(2).map(|w| (w[0], w[1]))
    }
}

pub fn linear_schedule(steps: usize) -> Result<TimeSchedule> {
    if steps == 0 {
        return Err(Error::InvalidSchedule("steps must be >= 1".into()));
    }
    let n = steps as f64;
    TimeSchedule::new((0..=steps).map(|i| i as f64 / n).collect())
}

/// `total_steps / 2` knots copied from an `emulated_n`-step linear schedule,
/// then `total_steps / 2` quadratically spaced steps up to 1.
///
/// With `L = total_steps / 2` the knots are `t_i = i / emulated_n` for
/// `i = 0..=L`, followed by `t_{L+k} = t_L + (1 - t_L)(k / L)^2` for
/// `k = 1..=L`. The prefix is computed with the same expression as
/// [`linear_schedule`], so it matches that schedule bit for bit.
pub fn linear_quadratic_schedule(total_steps: usize, emulated_n: usize) -> Result<TimeSchedule> {
    if total_steps < 2 || !total_steps.is_multiple_of(2) {
        return Err(Error::InvalidSchedule(format!(
            "total_steps must be even and >= 2, got {total_steps}"
        )));
    }
    let half = total_steps / 2;
    if emulated_n <= half {
        return Err(Error::InvalidSchedule(format!(
            "emulated_n ({emulated_n}) must exceed total_steps / 2 ({half})"
        )));
    }
    let n = emulated_n as f64;
    let mut knots: Vec<f64> = (0..=half).map(|i| i as f64 / n).collect();
    let t_l = knots[half];
    let l = half as f64;
    for k in 1..half {
        let r = k as f64 / l;
        knots.push(t_l + (1.0 - t_l) * r * r);
    }
    knots.push(1.0);
    TimeSchedule::new(knots)
}

/// Parses `linear:N` or `linquad:S,N`.
pub fn parse_schedule(spec: &str) -> Result<TimeSchedule> {
    let bad = || Error::invalid(format!("bad schedule `{spec}`; expected linear:N or linquad:S,N"));
    let (kind, args) = spec.split_once(':').ok_or_else(bad)?;
    let nums: Vec<usize> = args
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad())?;
    match (kind.trim(), nums.as_slice()) {
        ("linear", [n]) => linear_schedule(*n),
        ("linquad", [s, n]) => linear_quadratic_schedule(*s, *n),
        _ => Err(bad()),
    }
}
