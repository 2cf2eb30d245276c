use super::{Rng, Tensor};
use crate::error::{Error, Result};

/// Correctly rounded sum of `values` (Shewchuk's exact partials, as in
/// Python's `math.fsum`). The result does not depend on input order.
pub fn fsum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }

    // Round the partials to a single double, handling the half-way case.
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        let yr = x - hi;
        if y == yr {
            hi = x;
        }
    }
    hi
}

/// Tensor of i.i.d. standard normal draws.
pub fn sample_standard_normal(rng: &mut Rng, shape: &[usize]) -> Tensor {
    let numel: usize = shape.iter().product();
    let data = (0..numel).map(|_| rng.standard_normal()).collect();
    Tensor::new(shape.to_vec(), data).expect("length matches shape")
}

/// Logistic sigmoid, kept strictly inside (0, 1) for every finite input.
pub fn sigmoid(z: f64) -> f64 {
    let s = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    s.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// `n` draws of `sigmoid(z)` with `z ~ N(0, 1)`.
pub fn sample_logit_normal(rng: &mut Rng, n: usize) -> Tensor {
    let data = (0..n).map(|_| sigmoid(rng.standard_normal())).collect();
    Tensor::new(vec![n], data).expect("length matches shape")
}

/// Mean and population standard deviation over `axes`.
///
/// The reduced axes are removed from the output shape; reducing every axis
/// yields rank-0 tensors. Sums are correctly rounded, so a full reduction is
/// invariant under any permutation of the input.
pub fn reduce_stats(x: &Tensor, axes: &[usize]) -> Result<(Tensor, Tensor)> {
    let rank = x.rank();
    let mut reduced = vec![false; rank];
    for &a in axes {
        if a >= rank {
            return Err(Error::invalid(format!("axis {a} out of range for rank {rank}")));
        }
        if reduced[a] {
            return Err(Error::invalid(format!("axis {a} listed twice")));
        }
        reduced[a] = true;
    }
    if axes.iter().any(|&a| x.shape()[a] == 0) {
        return Err(Error::EmptyReduction);
    }

    let out_shape: Vec<usize> = (0..rank)
        .filter(|&a| !reduced[a])
        .map(|a| x.shape()[a])
        .collect();
    let out_len: usize = out_shape.iter().product();
    let count: usize = axes.iter().map(|&a| x.shape()[a]).product();

    // Group flat input indices by output slot.
    let mut groups: Vec<Vec<f64>> = vec![Vec::with_capacity(count); out_len];
    let mut idx = vec![0usize; rank];
    for &v in x.data() {
        let mut o = 0;
        for a in 0..rank {
            if !reduced[a] {
                o = o * x.shape()[a] + idx[a];
            }
        }
        groups[o].push(v);
        for a in (0..rank).rev() {
            idx[a] += 1;
            if idx[a] < x.shape()[a] {
                break;
            }
            idx[a] = 0;
        }
    }

    let n = count as f64;
    let mut means = Vec::with_capacity(out_len);
    let mut stds = Vec::with_capacity(out_len);
    for g in &groups {
        let mean = fsum(g.iter().copied()) / n;
        let var = fsum(g.iter().map(|v| (v - mean) * (v - mean))) / n;
        means.push(mean);
        stds.push(var.sqrt());
    }
    Ok((
        Tensor::new(out_shape.clone(), means)?,
        Tensor::new(out_shape, stds)?,
    ))
}
