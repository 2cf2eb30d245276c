use super::SegmentPlan;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    Uniform,
    /// Triangular (Bartlett) window, zero at both ends.
    #[default]
    Bartlett,
}

impl std::str::FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Window::Uniform),
            "bartlett" | "triangle" => Ok(Window::Bartlett),
            other => Err(Error::invalid(format!("unknown window `{other}`"))),
        }
    }
}

/// `m_n = 2/(n_win-1) · ((n_win-1)/2 - |n - (n_win-1)/2|)` for `n = 0..n_win`.
pub fn bartlett_window(n_win: usize) -> Result<Vec<f64>> {
    if n_win < 2 {
        return Err(Error::invalid(format!("bartlett window needs n_win >= 2, got {n_win}")));
    }
    Ok((0..n_win).map(|n| bartlett_value(n, n_win)).collect())
}

fn bartlett_value(n: usize, n_win: usize) -> f64 {
    if n_win < 2 {
        return 0.0;
    }
    let half = (n_win - 1) as f64 / 2.0;
    (half - (n as f64 - half).abs()) / half
}

/// Normalized weights a segment contributes to each frame of its span.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftMask {
    pub start: usize,
    pub weights: Vec<f64>,
}

impl SoftMask {
    pub fn end(&self) -> usize {
        self.start + self.weights.len()
    }
}

/// Raw window weights over segment `j`'s span. Each segment carries an
/// `n_win`-long window anchored at its unclipped start, so a first segment
/// clipped at frame 0 keeps the tail of its window.
pub fn raw_window(plan: &SegmentPlan, j: usize, window: Window) -> Vec<f64> {
    let (s, e) = plan.spans()[j];
    match window {
        Window::Uniform => vec![1.0; e - s],
        Window::Bartlett => {
            let vs = plan.virtual_start(j);
            (s..e)
                .map(|f| bartlett_value((f as isize - vs) as usize, plan.n_win()))
                .collect()
        }
    }
}

/// Per-frame normalized masks: each segment's raw window divided by the sum
/// of raw windows over all segments covering that frame. A frame whose raw
/// weights are all zero is shared equally among its covering segments.
pub fn normalized_masks(plan: &SegmentPlan, window: Window) -> Vec<SoftMask> {
    let n = plan.n_total();
    let raws: Vec<Vec<f64>> = (0..plan.segments()).map(|j| raw_window(plan, j, window)).collect();

    let mut total = vec![0.0; n];
    let mut count = vec![0usize; n];
    for (&(s, _), raw) in plan.spans().iter().zip(&raws) {
        for (k, &w) in raw.iter().enumerate() {
            total[s + k] += w;
            count[s + k] += 1;
        }
    }

    plan.spans()
        .iter()
        .zip(raws)
        .map(|(&(s, _), raw)| SoftMask {
            start: s,
            weights: raw
                .iter()
                .enumerate()
                .map(|(k, &w)| {
                    let f = s + k;
                    if total[f] > 0.0 {
                        w / total[f]
                    } else {
                        1.0 / count[f] as f64
                    }
                })
                .collect(),
        })
        .collect()
}

/// Per-frame weight table: row `f` holds every segment's weight on frame `f`
/// (zero where the segment does not reach).
pub fn mask_table(masks: &[SoftMask], n_total: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; masks.len()]; n_total];
    for (j, m) in masks.iter().enumerate() {
        for (k, &w) in m.weights.iter().enumerate() {
            rows[m.start + k][j] = w;
        }
    }
    rows
}
