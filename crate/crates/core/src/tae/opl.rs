use crate::error::{Error, Result};
use crate::numerics::{reduce_stats, Tensor};

/// Default hinge radius, in standard deviations.
pub const DEFAULT_OPL_RADIUS: f64 = 3.0;
/// Weight the outlier penalty carries in the autoencoder objective.
pub const DEFAULT_OPL_WEIGHT: f64 = 1e5;

/// Outlier penalty on a latent of shape `[C, H, W]`, or `[T, C, H, W]` with
/// the frame axis treated as a batch whose per-frame losses are averaged.
///
/// Per frame: channel means and population standard deviations are taken over
/// the spatial positions; each position contributes
/// `max(|x_ij - mean| - r·|std|, 0)` with `|·|` the Euclidean norm over
/// channels, and the contributions are averaged over `H·W`.
pub fn opl_loss(x: &Tensor, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::invalid(format!("radius {r} must be >= 0")));
    }
    match x.rank() {
        3 => frame_loss(x, r),
        4 => {
            let t = x.frames();
            if t == 0 {
                return Err(Error::EmptyReduction);
            }
            let mut total = 0.0;
            for i in 0..t {
                let frame = x.slice_frames(i, i + 1)?.reshape(x.shape()[1..].to_vec())?;
                total += frame_loss(&frame, r)?;
            }
            Ok(total / t as f64)
        }
        _ => Err(Error::invalid(format!(
            "expected [C, H, W] or [T, C, H, W], got {:?}",
            x.shape()
        ))),
    }
}

fn frame_loss(x: &Tensor, r: f64) -> Result<f64> {
    let (c, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    if h == 0 || w == 0 || c == 0 {
        return Err(Error::EmptyReduction);
    }
    let (mean, std) = reduce_stats(x, &[1, 2])?;
    let std_norm = std.data().iter().map(|s| s * s).sum::<f64>().sqrt();
    let threshold = r * std_norm;
    let hw = h * w;
    let mut total = 0.0;
    for p in 0..hw {
        let dev2: f64 = (0..c)
            .map(|ch| {
                let d = x.data()[ch * hw + p] - mean.data()[ch];
                d * d
            })
            .sum();
        total += (dev2.sqrt() - threshold).max(0.0);
    }
    Ok(total / hw as f64)
}
