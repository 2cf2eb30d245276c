//! Time schedules, ODE solvers and classifier-free guidance.
//!
//! Solvers integrate forward from noise at `t = 0` to data at `t = 1`.

mod schedule;
mod solver;

pub use schedule::{linear_quadratic_schedule, linear_schedule, parse_schedule, TimeSchedule};
pub use solver::{
    effective_velocity, euler_solve, field_fn, midpoint_solve, solve, solver_step, FnField, Solver,
    VelocityField,
};

use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// Default guidance scale for video sampling.
pub const VIDEO_GUIDANCE_SCALE: f64 = 7.5;
/// Default guidance scale for audio sampling.
pub const AUDIO_GUIDANCE_SCALE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceConfig {
    scale: f64,
}

impl GuidanceConfig {
    pub fn new(scale: f64) -> Result<Self> {
        if !scale.is_finite() || scale < 0.0 {
            return Err(Error::invalid(format!("guidance scale {scale} must be finite and >= 0")));
        }
        Ok(Self { scale })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// `u_uncond + scale * (u_cond - u_uncond)`, evaluated as
/// `scale * u_cond + (1 - scale) * u_uncond` so that scale 1 returns `u_cond`
/// and scale 0 returns `u_uncond` exactly.
pub fn cfg_velocity(u_cond: &Tensor, u_uncond: &Tensor, scale: f64) -> Result<Tensor> {
    let rest = 1.0 - scale;
    u_cond.zip_map(u_uncond, |c, u| scale * c + rest * u)
}
