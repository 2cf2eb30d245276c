use crate::error::{Error, Result};

pub const DEFAULT_N_WIN: usize = 40;
pub const DEFAULT_N_HOP: usize = 30;
pub const DEFAULT_N_CTX: usize = 10;

/// Overlapping segments over `n_total` frames.
///
/// Segment `j` (1-based) spans
/// `[max(0, (j-1)·n_hop - n_ctx), min(N, j·n_hop))` for `j = 1..=ceil(N / n_hop)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentPlan {
    n_total: usize,
    n_hop: usize,
    n_ctx: usize,
    spans: Vec<(usize, usize)>,
}

impl SegmentPlan {
    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn n_hop(&self) -> usize {
        self.n_hop
    }

    pub fn n_ctx(&self) -> usize {
        self.n_ctx
    }

    pub fn n_win(&self) -> usize {
        self.n_hop + self.n_ctx
    }

    pub fn spans(&self) -> &[(usize, usize)] {
        &self.spans
    }

    pub fn segments(&self) -> usize {
        self.spans.len()
    }

    /// Frame where segment `j` (0-based) would start if it were a full
    /// `n_win` window; negative for a first segment clipped at frame 0.
    pub(crate) fn virtual_start(&self, j: usize) -> isize {
        (j * self.n_hop) as isize - self.n_ctx as isize
    }
}

pub fn plan_segments(n_total: usize, n_hop: usize, n_ctx: usize) -> Result<SegmentPlan> {
    if n_total == 0 || n_hop == 0 {
        return Err(Error::invalid(format!(
            "need n_total >= 1 and n_hop >= 1 (got {n_total}, {n_hop})"
        )));
    }
    let segments = n_total.div_ceil(n_hop);
    let spans = (1..=segments)
        .map(|j| {
            let start = ((j - 1) * n_hop).saturating_sub(n_ctx);
            let end = (j * n_hop).min(n_total);
            (start, end)
        })
        .collect();
    Ok(SegmentPlan {
        n_total,
        n_hop,
        n_ctx,
        spans,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_example() {
        let p = plan_segments(30, 15, 5).unwrap();
        assert_eq!(p.spans(), &[(0, 15), (10, 30)]);
        assert_eq!(p.n_win(), 20);
    }

    #[test]
    fn short_input_is_one_segment() {
        assert_eq!(plan_segments(12, 15, 5).unwrap().spans(), &[(0, 12)]);
        assert_eq!(plan_segments(15, 15, 5).unwrap().spans(), &[(0, 15)]);
    }

    #[test]
    fn defaults() {
        let p = plan_segments(100, DEFAULT_N_HOP, DEFAULT_N_CTX).unwrap();
        assert_eq!(p.n_win(), DEFAULT_N_WIN);
        assert_eq!(p.spans(), &[(0, 30), (20, 60), (50, 90), (80, 100)]);
    }

    #[test]
    fn errors() {
        assert!(plan_segments(0, 15, 5).is_err());
        assert!(plan_segments(10, 0, 5).is_err());
    }

    proptest! {
        #[test]
        fn spans_cover_everything(n in 1usize..300, hop in 1usize..50, ctx in 0usize..60) {
            let p = plan_segments(n, hop, ctx).unwrap();
            prop_assert_eq!(p.segments(), n.div_ceil(hop));
            let mut covered = vec![false; n];
            for &(s, e) in p.spans() {
                prop_assert!(s < e && e <= n);
                prop_assert!(e - s <= p.n_win());
                covered[s..e].iter_mut().for_each(|c| *c = true);
            }
            prop_assert!(covered.into_iter().all(|c| c));
        }
    }
}
