use super::{normalized_masks, SegmentPlan, Window};
use crate::error::{Error, Result};
use crate::numerics::{convex_blend, sample_standard_normal, Rng, Tensor};
use crate::sampler::{solver_step, GuidanceConfig, Solver, TimeSchedule, VelocityField};

/// Solver settings shared by all extension algorithms.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExtensionOptions {
    pub solver: Solver,
    pub guidance: Option<GuidanceConfig>,
}

/// Which routes carry information from one segment to the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArMode {
    /// The field sees the previous segment's overlapping frames as `cond`.
    Context,
    /// Overlapping frames are ramp-blended with the previous trajectory at every step.
    Trajectory,
    Both,
}

impl ArMode {
    fn context(self) -> bool {
        matches!(self, ArMode::Context | ArMode::Both)
    }

    fn trajectory(self) -> bool {
        matches!(self, ArMode::Trajectory | ArMode::Both)
    }
}

impl std::str::FromStr for ArMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "context" => Ok(ArMode::Context),
            "trajectory" => Ok(ArMode::Trajectory),
            "both" => Ok(ArMode::Both),
            other => Err(Error::invalid(format!("unknown autoregressive mode `{other}`"))),
        }
    }
}

fn field_for<'a>(fields: &[&'a dyn VelocityField], j: usize, segments: usize) -> Result<&'a dyn VelocityField> {
    match fields.len() {
        1 => Ok(fields[0]),
        n if n == segments => Ok(fields[j]),
        n => Err(Error::invalid(format!(
            "{n} velocity fields for {segments} segments (expected 1 or {segments})"
        ))),
    }
}

/// Multi-diffusion: every schedule step solves each segment slice separately
/// and merges the per-segment predictions with normalized soft masks.
///
/// `fields` holds one field shared by all segments or one per segment.
pub fn multidiffusion_solve(
    fields: &[&dyn VelocityField],
    plan: &SegmentPlan,
    sched: &TimeSchedule,
    window: Window,
    x_init: &Tensor,
    opts: &ExtensionOptions,
) -> Result<Tensor> {
    if x_init.rank() == 0 || x_init.frames() != plan.n_total() {
        return Err(Error::ShapeMismatch {
            expected: vec![plan.n_total()],
            found: x_init.shape().to_vec(),
        });
    }
    let masks = normalized_masks(plan, window);
    let segment_fields: Vec<&dyn VelocityField> = (0..plan.segments())
        .map(|j| field_for(fields, j, plan.segments()))
        .collect::<Result<_>>()?;

    let mut x = x_init.clone();
    for (t0, t1) in sched.intervals() {
        let mut merged = Tensor::zeros(x.shape());
        let mut written = vec![false; plan.n_total()];
        for (mask, field) in masks.iter().zip(&segment_fields) {
            let slice = x.slice_frames(mask.start, mask.end())?;
            let pred = solver_step(opts.solver, *field, &slice, t0, t1, None, opts.guidance.as_ref())?;
            for (k, &w) in mask.weights.iter().enumerate() {
                let f = mask.start + k;
                let dst = merged.frame_mut(f);
                if written[f] {
                    dst.iter_mut().zip(pred.frame(k)).for_each(|(d, &v)| *d += w * v);
                } else {
                    dst.iter_mut().zip(pred.frame(k)).for_each(|(d, &v)| *d = w * v);
                }
            }
            written[mask.start..mask.end()].iter_mut().for_each(|b| *b = true);
        }
        x = merged;
    }
    Ok(x)
}

/// Context for the next segment: the last `n_ctx` frames of `prev_x1`
/// followed by `n_hop` zero frames.
pub fn ar_context(prev_x1: &Tensor, n_ctx: usize, n_hop: usize) -> Result<Tensor> {
    let n_win = n_ctx + n_hop;
    if prev_x1.rank() == 0 || prev_x1.frames() != n_win {
        return Err(Error::ShapeMismatch {
            expected: vec![n_win],
            found: prev_x1.shape().to_vec(),
        });
    }
    let mut ctx = prev_x1.zeros_like();
    ctx.write_frames(0, &prev_x1.slice_frames(n_win - n_ctx, n_win)?)?;
    Ok(ctx)
}

/// Ramp blend over `n` overlapping frames: frame `n` (1-based) takes weight
/// `n / N` on the new prediction and the rest on the previous trajectory.
pub fn ar_trajectory_blend(x_hat_head: &Tensor, prev_tail: &Tensor) -> Result<Tensor> {
    x_hat_head.ensure_same_shape(prev_tail)?;
    let n = x_hat_head.frames();
    let mut out = prev_tail.clone();
    for i in 0..n {
        let w = (i + 1) as f64 / n as f64;
        for (o, &x) in out.frame_mut(i).iter_mut().zip(x_hat_head.frame(i)) {
            *o = convex_blend(x, *o, w);
        }
    }
    Ok(out)
}

/// Generated sequence plus, under trajectory regularization, the global
/// state at every schedule knot.
#[derive(Debug, Clone)]
struct ArState {
    out: Tensor,
    trajectory: Vec<Tensor>,
}

impl ArState {
    fn new(plan: &SegmentPlan, sched: &TimeSchedule, frame_shape: &[usize], mode: ArMode) -> Self {
        let shape = [&[plan.n_total()], frame_shape].concat();
        let trajectory = if mode.trajectory() {
            vec![Tensor::zeros(&shape); sched.knots().len()]
        } else {
            Vec::new()
        };
        Self {
            out: Tensor::zeros(&shape),
            trajectory,
        }
    }
}

/// Noise for segment `j`, candidate `c`: stream `rng.fork(j).fork(c)`.
fn segment_noise(rng: &Rng, j: usize, candidate: usize, shape: &[usize]) -> Tensor {
    sample_standard_normal(&mut rng.fork(j as u64).fork(candidate as u64), shape)
}

struct SegmentJob<'a> {
    field: &'a dyn VelocityField,
    plan: &'a SegmentPlan,
    sched: &'a TimeSchedule,
    mode: ArMode,
    opts: &'a ExtensionOptions,
}

impl SegmentJob<'_> {
    /// Solves segment `j` from `noise` to `t = 1` on top of `state`.
    fn run(&self, j: usize, state: &ArState, noise: Tensor) -> Result<ArState> {
        let (s, e) = self.plan.spans()[j];
        let len = e - s;
        let overlap = if j == 0 {
            0
        } else {
            (self.plan.spans()[j - 1].1 - s).min(len)
        };

        let cond = if self.mode.context() {
            let mut ctx = noise.zeros_like();
            ctx.write_frames(0, &state.out.slice_frames(s, s + overlap)?)?;
            Some(ctx)
        } else {
            None
        };

        let mut next = state.clone();
        let mut x = noise;
        if self.mode.trajectory() {
            next.trajectory[0].write_frames(s, &x)?;
        }
        for (i, (t0, t1)) in self.sched.intervals().enumerate() {
            let mut x_hat = solver_step(
                self.opts.solver,
                self.field,
                &x,
                t0,
                t1,
                cond.as_ref(),
                self.opts.guidance.as_ref(),
            )?;
            if self.mode.trajectory() {
                if overlap > 0 {
                    let prev = next.trajectory[i + 1].slice_frames(s, s + overlap)?;
                    let head = x_hat.slice_frames(0, overlap)?;
                    x_hat.write_frames(0, &ar_trajectory_blend(&head, &prev)?)?;
                }
                next.trajectory[i + 1].write_frames(s, &x_hat)?;
            }
            x = x_hat;
        }
        // The later segment's consolidated prediction replaces overlapping frames.
        next.out.write_frames(s, &x)?;
        Ok(next)
    }
}

/// Segment-level autoregressive extension: each segment is solved to
/// completion before the next starts. Segment `j` starts from the noise
/// stream `rng.fork(j).fork(0)`.
pub fn ar_generate(
    fields: &[&dyn VelocityField],
    plan: &SegmentPlan,
    sched: &TimeSchedule,
    mode: ArMode,
    opts: &ExtensionOptions,
    frame_shape: &[usize],
    rng: &Rng,
) -> Result<Tensor> {
    let mut state = ArState::new(plan, sched, frame_shape, mode);
    for j in 0..plan.segments() {
        let job = SegmentJob {
            field: field_for(fields, j, plan.segments())?,
            plan,
            sched,
            mode,
            opts,
        };
        let (s, e) = plan.spans()[j];
        let noise = segment_noise(rng, j, 0, &[&[e - s], frame_shape].concat());
        state = job.run(j, &state, noise)?;
    }
    Ok(state.out)
}

/// Segment-level beam search over autoregressive extension.
///
/// At segment `j`, surviving prefix `p` (in rank order) spawns `candidates`
/// continuations; continuation `c` draws noise from stream
/// `rng.fork(j).fork(p·candidates + c)`. `scorer` rates the partial sequence
/// `[0, end_j)`; the best `beam` survive, ties kept in generation order.
#[allow(clippy::too_many_arguments)]
pub fn beam_extend(
    fields: &[&dyn VelocityField],
    plan: &SegmentPlan,
    sched: &TimeSchedule,
    mode: ArMode,
    opts: &ExtensionOptions,
    frame_shape: &[usize],
    scorer: &dyn Fn(&Tensor) -> f64,
    candidates: usize,
    beam: usize,
    rng: &Rng,
) -> Result<Tensor> {
    if beam == 0 || candidates < beam {
        return Err(Error::invalid(format!(
            "need candidates >= beam >= 1 (got candidates {candidates}, beam {beam})"
        )));
    }
    let mut beams = vec![ArState::new(plan, sched, frame_shape, mode)];
    for j in 0..plan.segments() {
        let job = SegmentJob {
            field: field_for(fields, j, plan.segments())?,
            plan,
            sched,
            mode,
            opts,
        };
        let (s, e) = plan.spans()[j];
        let shape = [&[e - s], frame_shape].concat();
        let mut pool: Vec<(f64, ArState)> = Vec::with_capacity(beams.len() * candidates);
        for (p, prefix) in beams.iter().enumerate() {
            for c in 0..candidates {
                let next = job.run(j, prefix, segment_noise(rng, j, p * candidates + c, &shape))?;
                let score = scorer(&next.out.slice_frames(0, e)?);
                if !score.is_finite() {
                    return Err(Error::NonFiniteScore(score));
                }
                pool.push((score, next));
            }
        }
        pool.sort_by(|a, b| b.0.total_cmp(&a.0));
        pool.truncate(beam);
        beams = pool.into_iter().map(|(_, st)| st).collect();
    }
    Ok(beams.swap_remove(0).out)
}
