//! Flow-matching sampling, temporal-autoencoder tiling, long-sequence
//! extension and pairwise evaluation statistics, all in plain `f64`.
//!
//! Module map:
//!
//! * [`numerics`]: [`Tensor`], seeded [`Rng`] streams, exact reductions.
//! * [`flow`]: optimal-transport interpolation, velocity targets, loss, batches.
//! * [`sampler`]: time schedules, Euler / midpoint solvers, guidance.
//! * [`tae`]: latent frame arithmetic, outlier penalty, temporal tiling.
//! * [`extension`]: segment plans, multi-diffusion, autoregressive and beam extension.
//! * [`model`]: a small MLP velocity field with manual backprop, patch and
//!   positional-embedding arithmetic, checkpoints.
//! * [`eval`]: consensus, net win rate, bootstrap intervals, Elo, Bradley-Terry.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eval;
pub mod extension;
pub mod flow;
pub mod model;
pub mod numerics;
pub mod sampler;
pub mod tae;

pub use error::{Error, Result};
pub use numerics::{Rng, Tensor};
