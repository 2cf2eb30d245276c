use super::{cfg_velocity, GuidanceConfig, TimeSchedule};
use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// A velocity field `u(x, t, cond)`; output has the shape of `x`.
pub trait VelocityField {
    fn velocity(&self, x: &Tensor, t: f64, cond: Option<&Tensor>) -> Result<Tensor>;
}

impl<V: VelocityField + ?Sized> VelocityField for &V {
    fn velocity(&self, x: &Tensor, t: f64, cond: Option<&Tensor>) -> Result<Tensor> {
        (**self).velocity(x, t, cond)
    }
}

impl<V: VelocityField + ?Sized> VelocityField for Box<V> {
    fn velocity(&self, x: &Tensor, t: f64, cond: Option<&Tensor>) -> Result<Tensor> {
        (**self).velocity(x, t, cond)
    }
}

/// Adapter turning an infallible closure into a [`VelocityField`].
pub struct FnField<F>(F);

pub fn field_fn<F>(f: F) -> FnField<F>
where
    F: Fn(&Tensor, f64, Option<&Tensor>) -> Tensor,
{
    FnField(f)
}

impl<F> VelocityField for FnField<F>
where
    F: Fn(&Tensor, f64, Option<&Tensor>) -> Tensor,
{
    fn velocity(&self, x: &Tensor, t: f64, cond: Option<&Tensor>) -> Result<Tensor> {
        Ok((self.0)(x, t, cond))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    #[default]
    Euler,
    Midpoint,
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Solver::Euler),
            "midpoint" => Ok(Solver::Midpoint),
            other => Err(Error::invalid(format!("unknown solver `{other}`"))),
        }
    }
}

/// Field velocity with guidance applied when configured. The unconditional
/// branch is the same field queried with `cond = None`.
pub fn effective_velocity(
    field: &dyn VelocityField,
    x: &Tensor,
    t: f64,
    cond: Option<&Tensor>,
    guidance: Option<&GuidanceConfig>,
) -> Result<Tensor> {
    let u = checked(field, x, t, cond)?;
    match guidance {
        None => Ok(u),
        Some(g) => {
            let uncond = checked(field, x, t, None)?;
            cfg_velocity(&u, &uncond, g.scale())
        }
    }
}

fn checked(field: &dyn VelocityField, x: &Tensor, t: f64, cond: Option<&Tensor>) -> Result<Tensor> {
    let u = field.velocity(x, t, cond)?;
    if u.shape() != x.shape() {
        return Err(Error::ShapeMismatch {
            expected: x.shape().to_vec(),
            found: u.shape().to_vec(),
        });
    }
    Ok(u)
}

/// One step from `t0` to `t1`.
pub fn solver_step(
    solver: Solver,
    field: &dyn VelocityField,
    x: &Tensor,
    t0: f64,
    t1: f64,
    cond: Option<&Tensor>,
    guidance: Option<&GuidanceConfig>,
) -> Result<Tensor> {
    let h = t1 - t0;
    let k = effective_velocity(field, x, t0, cond, guidance)?;
    match solver {
        Solver::Euler => x.axpy(h, &k),
        Solver::Midpoint => {
            let mid = x.axpy(0.5 * h, &k)?;
            let k_mid = effective_velocity(field, &mid, t0 + 0.5 * h, cond, guidance)?;
            x.axpy(h, &k_mid)
        }
    }
}

/// Integrates from `t = 0` to `t = 1` over `sched`.
pub fn solve(
    solver: Solver,
    field: &dyn VelocityField,
    x0: &Tensor,
    sched: &TimeSchedule,
    cond: Option<&Tensor>,
    guidance: Option<&GuidanceConfig>,
) -> Result<Tensor> {
    let mut x = x0.clone();
    for (t0, t1) in sched.intervals() {
        x = solver_step(solver, field, &x, t0, t1, cond, guidance)?;
    }
    Ok(x)
}

pub fn euler_solve(
    field: &dyn VelocityField,
    x0: &Tensor,
    sched: &TimeSchedule,
    cond: Option<&Tensor>,
    guidance: Option<&GuidanceConfig>,
) -> Result<Tensor> {
    solve(Solver::Euler, field, x0, sched, cond, guidance)
}

pub fn midpoint_solve(
    field: &dyn VelocityField,
    x0: &Tensor,
    sched: &TimeSchedule,
    cond: Option<&Tensor>,
    guidance: Option<&GuidanceConfig>,
) -> Result<Tensor> {
    solve(Solver::Midpoint, field, x0, sched, cond, guidance)
}
