//! Flow-matching training targets along the optimal-transport path.
//!
//! A training sample interpolates noise `x0 ~ N(0, 1)` and data `x1` as
//! `xt = t·x1 + (1 − (1 − σ_min)·t)·x0` and regresses the constant path
//! velocity `vt = x1 − (1 − σ_min)·x0` with a mean squared error.

use crate::error::{Error, Result};
use crate::numerics::{sample_logit_normal, sample_standard_normal, Rng, Tensor};

pub const DEFAULT_SIGMA_MIN: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSample {
    pub x0: Tensor,
    pub x1: Tensor,
    pub t: f64,
    pub xt: Tensor,
    pub vt: Tensor,
    pub sigma_min: f64,
    /// Position of `x1` in the dataset it was drawn from.
    pub index: usize,
}

pub fn ot_interpolate(x0: &Tensor, x1: &Tensor, t: f64, sigma_min: f64) -> Result<Tensor> {
    x0.ensure_same_shape(x1)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("t = {t} outside [0, 1]")));
    }
    if !(sigma_min >= 0.0) {
        return Err(Error::invalid(format!("sigma_min = {sigma_min} must be >= 0")));
    }
    // Zero SNR at t = 0: the path starts exactly at the noise.
    if t == 0.0 {
        return Ok(x0.clone());
    }
    let noise_coef = 1.0 - (1.0 - sigma_min) * t;
    x0.zip_map(x1, |a, b| t * b + noise_coef * a)
}

pub fn velocity_target(x0: &Tensor, x1: &Tensor, sigma_min: f64) -> Result<Tensor> {
    let keep = 1.0 - sigma_min;
    x0.zip_map(x1, |a, b| b - keep * a)
}

/// Mean over all elements of `(pred - target)^2`.
pub fn fm_loss(pred: &Tensor, target: &Tensor) -> Result<f64> {
    pred.ensure_same_shape(target)?;
    if pred.is_empty() {
        return Err(Error::EmptyLoss);
    }
    let sse: f64 = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, q)| (p - q) * (p - q))
        .sum();
    Ok(sse / pred.len() as f64)
}

pub fn make_sample(x0: Tensor, x1: Tensor, t: f64, sigma_min: f64, index: usize) -> Result<FlowSample> {
    let xt = ot_interpolate(&x0, &x1, t, sigma_min)?;
    let vt = velocity_target(&x0, &x1, sigma_min)?;
    Ok(FlowSample {
        x0,
        x1,
        t,
        xt,
        vt,
        sigma_min,
        index,
    })
}

/// Draws `batch` training samples.
///
/// Per sample, in this order: a dataset index, the noise tensor, then one
/// logit-normal `t`.
pub fn make_training_batch(
    dataset: &[Tensor],
    batch: usize,
    rng: &mut Rng,
    sigma_min: f64,
) -> Result<Vec<FlowSample>> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput("dataset"));
    }
    if batch == 0 {
        return Err(Error::invalid("batch must be >= 1"));
    }
    (0..batch)
        .map(|_| {
            let index = rng.below(dataset.len());
            let x1 = dataset[index].clone();
            let x0 = sample_standard_normal(rng, x1.shape());
            let t = sample_logit_normal(rng, 1).data()[0];
            make_sample(x0, x1, t, sigma_min, index)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::numerics::Rng;

    fn t1(v: &[f64]) -> Tensor {
        Tensor::from_slice(v)
    }

    #[test]
    fn interpolation_endpoints() {
        let x0 = t1(&[0.3, -1.2, 2.0]);
        let x1 = t1(&[1.0, 4.0, -0.5]);
        assert_eq!(ot_interpolate(&x0, &x1, 0.0, 1e-5).unwrap(), x0);

        let end = ot_interpolate(&x0, &x1, 1.0, 1e-5).unwrap();
        let expect = x1.axpy(1e-5, &x0).unwrap();
        assert!(end.max_abs_diff(&expect).unwrap() < 1e-15);

        let v = t1(&[2.0, -3.0]);
        let mid = ot_interpolate(&Tensor::zeros(&[2]), &v, 0.3, 1e-5).unwrap();
        assert_eq!(mid, v.scale(0.3));
    }

    #[test]
    fn interpolation_errors() {
        assert!(matches!(
            ot_interpolate(&t1(&[1.0]), &t1(&[1.0, 2.0]), 0.5, 0.0),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(ot_interpolate(&t1(&[1.0]), &t1(&[1.0]), 1.5, 0.0).is_err());
    }

    #[test]
    fn velocity_examples() {
        let x1 = t1(&[2.0, 0.0]);
        assert_eq!(velocity_target(&Tensor::zeros(&[2]), &x1, 1e-5).unwrap(), x1);
        let x0 = t1(&[1.5, -2.0]);
        assert_eq!(
            velocity_target(&x0, &Tensor::zeros(&[2]), 0.0).unwrap(),
            x0.scale(-1.0)
        );
        let v = velocity_target(&t1(&[1.0, 1.0]), &x1, 1e-5).unwrap();
        assert!((v.data()[0] - 1.00001).abs() < 1e-15);
        assert!((v.data()[1] + 0.99999).abs() < 1e-15);
        assert!(velocity_target(&t1(&[1.0]), &x1, 1e-5).is_err());
    }

    #[test]
    fn loss_examples() {
        let p = t1(&[1.0, -2.0, 0.5]);
        assert_eq!(fm_loss(&p, &p).unwrap(), 0.0);
        let shifted = p.map(|v| v + 0.75);
        assert!((fm_loss(&shifted, &p).unwrap() - 0.5625).abs() < 1e-15);
        assert_eq!(fm_loss(&Tensor::zeros(&[2]), &t1(&[3.0, 4.0])).unwrap(), 12.5);
        assert!(matches!(
            fm_loss(&Tensor::zeros(&[0]), &Tensor::zeros(&[0])),
            Err(Error::EmptyLoss)
        ));
    }

    #[test]
    fn batch_single_point() {
        let p = t1(&[1.5, -0.5]);
        let mut rng = Rng::from_seed(1);
        let b = make_training_batch(std::slice::from_ref(&p), 1, &mut rng, DEFAULT_SIGMA_MIN).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].x1, p);
        assert!(b[0].t > 0.0 && b[0].t < 1.0);
    }

    #[test]
    fn batch_errors() {
        let mut rng = Rng::from_seed(1);
        assert!(matches!(
            make_training_batch(&[], 4, &mut rng, 1e-5),
            Err(Error::EmptyInput(_))
        ));
        assert!(make_training_batch(&[t1(&[0.0])], 0, &mut rng, 1e-5).is_err());
    }

    #[test]
    fn batch_is_deterministic() {
        let data = vec![t1(&[0.0, 1.0]), t1(&[2.0, 3.0]), t1(&[-1.0, 5.0])];
        let a = make_training_batch(&data, 16, &mut Rng::from_seed(5), 1e-5).unwrap();
        let b = make_training_batch(&data, 16, &mut Rng::from_seed(5), 1e-5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn batch_t_mean_matches_logit_normal() {
        // Monte-Carlo reference mean from the logit-normal sampler itself.
        let reference = sample_logit_normal(&mut Rng::new(77, 9), 200_000);
        let ref_mean = reference.data().iter().sum::<f64>() / reference.len() as f64;

        let data = vec![t1(&[0.0])];
        let b = make_training_batch(&data, 1000, &mut Rng::from_seed(12), 1e-5).unwrap();
        let mean = b.iter().map(|s| s.t).sum::<f64>() / b.len() as f64;
        assert!((mean - ref_mean).abs() < 0.02, "{mean} vs {ref_mean}");
    }

    fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-3.0f64..3.0, n)
    }

    proptest! {
        #[test]
        fn zero_snr_endpoint_is_bit_exact(x0 in vec_strategy(6), x1 in vec_strategy(6), s in 0.0f64..0.1) {
            let a = t1(&x0);
            let out = ot_interpolate(&a, &t1(&x1), 0.0, s).unwrap();
            let bits = |t: &Tensor| t.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&out), bits(&a));
        }

        #[test]
        fn sample_invariants(x0 in vec_strategy(4), x1 in vec_strategy(4), t in 0.0f64..=1.0) {
            let s = make_sample(t1(&x0), t1(&x1), t, DEFAULT_SIGMA_MIN, 0).unwrap();
            for i in 0..4 {
                let expect = t * x1[i] + (1.0 - (1.0 - DEFAULT_SIGMA_MIN) * t) * x0[i];
                let scale = expect.abs().max(1.0);
                prop_assert!((s.xt.data()[i] - expect).abs() <= 1e-12 * scale);
                prop_assert_eq!(s.vt.data()[i], x1[i] - (1.0 - DEFAULT_SIGMA_MIN) * x0[i]);
            }
        }

        #[test]
        fn difference_quotient_matches_velocity(x0 in prop::collection::vec(-1.0f64..1.0, 5),
                                                x1 in prop::collection::vec(-1.0f64..1.0, 5),
                                                t in 0.0f64..0.9) {
            let h = 1e-8;
            let (a, b) = (t1(&x0), t1(&x1));
            let lo = ot_interpolate(&a, &b, t, DEFAULT_SIGMA_MIN).unwrap();
            let hi = ot_interpolate(&a, &b, t + h, DEFAULT_SIGMA_MIN).unwrap();
            let fd = hi.sub(&lo).unwrap().scale(1.0 / h);
            let v = velocity_target(&a, &b, DEFAULT_SIGMA_MIN).unwrap();
            prop_assert!(fd.max_abs_diff(&v).unwrap() <= 1e-6);
        }

        #[test]
        fn loss_nonnegative_zero_iff_equal(p in vec_strategy(5), q in vec_strategy(5)) {
            let l = fm_loss(&t1(&p), &t1(&q)).unwrap();
            prop_assert!(l >= 0.0);
            prop_assert_eq!(l == 0.0, p == q);
        }
    }
}
