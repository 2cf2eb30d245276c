//! Dense arrays, seeded sampling and reductions shared by every other module.

mod rng;
mod stats;
mod tensor;

pub use rng::Rng;
pub use stats::{fsum, reduce_stats, sample_logit_normal, sample_standard_normal, sigmoid};
pub use tensor::{convex_blend, Tensor};
