use serde_json::json;

use flowkit::extension::{
    ar_generate, beam_extend, mask_table, multidiffusion_solve, normalized_masks, plan_segments, ArMode,
    ExtensionOptions, Window,
};
use flowkit::numerics::{fsum, sample_standard_normal};
use flowkit::sampler::{parse_schedule, VelocityField};
use flowkit::{Rng, Tensor};

use super::report;
use crate::args::{ArModeArg, Cli, ExtendArgs, ExtendMode, WindowArg};
use crate::output::{write_file, Output, Table};
use crate::Failure;

/// Toy sequence field: each frame drifts toward the mean of its neighbours
/// and, where a context frame is supplied, toward that frame as well.
struct SmoothingField;

impl VelocityField for SmoothingField {
    fn velocity(&self, x: &Tensor, _t: f64, cond: Option<&Tensor>) -> flowkit::Result<Tensor> {
        if let Some(c) = cond {
            x.ensure_same_shape(c)?;
        }
        let n = x.frames();
        let mut v = x.zeros_like();
        for i in 0..n {
            let (prev, cur, next) = (x.frame(i.saturating_sub(1)), x.frame(i), x.frame((i + 1).min(n - 1)));
            // All-zero context frames carry no information and are skipped.
            let ctx = cond.map(|c| c.frame(i)).filter(|c| c.iter().any(|&v| v != 0.0));
            for (k, out) in v.frame_mut(i).iter_mut().enumerate() {
                *out = 0.5 * (prev[k] + next[k]) - cur[k];
                if let Some(c) = ctx {
                    *out += c[k] - cur[k];
                }
            }
        }
        Ok(v)
    }
}

/// Beam score: negative squared jump between consecutive frames.
fn smoothness(x: &Tensor) -> f64 {
    -fsum((1..x.frames()).flat_map(|i| x.frame(i).iter().zip(x.frame(i - 1)).map(|(a, b)| (a - b) * (a - b))))
}

pub fn extend(cli: &Cli, a: &ExtendArgs) -> Result<Output, Failure> {
    let plan = plan_segments(a.n, a.hop, a.ctx)?;
    let sched = parse_schedule(&a.schedule)?;
    if a.frame_dim == 0 {
        return Err(Failure::usage("--frame-dim must be >= 1"));
    }
    let window = match a.window {
        WindowArg::Uniform => Window::Uniform,
        WindowArg::Triangle => Window::Bartlett,
    };
    let ar_mode = match a.ar_mode {
        ArModeArg::Context => ArMode::Context,
        ArModeArg::Trajectory => ArMode::Trajectory,
        ArModeArg::Both => ArMode::Both,
    };
    let opts = ExtensionOptions::default();
    let field = SmoothingField;
    let fields: [&dyn VelocityField; 1] = [&field];
    let frame_shape = [a.frame_dim];
    let rng = Rng::from_seed(cli.seed);

    let seq = match a.mode {
        // Same noise stream as the first autoregressive segment, so a
        // single-segment plan gives identical output in every mode.
        ExtendMode::Md => {
            let x_init = sample_standard_normal(&mut rng.fork(0).fork(0), &[a.n, a.frame_dim]);
            multidiffusion_solve(&fields, &plan, &sched, window, &x_init, &opts)?
        }
        ExtendMode::Ar => ar_generate(&fields, &plan, &sched, ar_mode, &opts, &frame_shape, &rng)?,
        ExtendMode::Beam => beam_extend(
            &fields,
            &plan,
            &sched,
            ar_mode,
            &opts,
            &frame_shape,
            &smoothness,
            a.candidates,
            a.beam,
            &rng,
        )?,
    };
    let sequence: Vec<Vec<f64>> = (0..seq.frames()).map(|i| seq.frame(i).to_vec()).collect();

    let masks = mask_table(&normalized_masks(&plan, window), a.n);
    let sums: Vec<f64> = masks.iter().map(|r| fsum(r.iter().copied())).collect();
    let mut table = Table::new(
        std::iter::once("frame".to_string())
            .chain((0..plan.segments()).map(|j| format!("segment_{j}")))
            .chain(std::iter::once("sum".to_string())),
    );
    for (f, (row, sum)) in masks.iter().zip(&sums).enumerate() {
        table.push(
            std::iter::once(f.to_string())
                .chain(row.iter().map(f64::to_string))
                .chain(std::iter::once(sum.to_string())),
        );
    }

    let mut seq_table = Table::new(std::iter::once("frame".to_string()).chain((0..a.frame_dim).map(|k| format!("v{k}"))));
    for (f, row) in sequence.iter().enumerate() {
        seq_table.push(std::iter::once(f.to_string()).chain(row.iter().map(f64::to_string)));
    }
    let seq_path = cli.out_dir.join("sequence.csv");
    write_file(&seq_path, &seq_table.to_csv())?;

    Ok(Output {
        report: report(
            cli,
            "extend",
            json!({
                "spans": plan.spans(),
                "masks": masks,
                "mask_sums": sums,
                "sequence_file": seq_path,
                "sequence": sequence,
            }),
        ),
        table,
    })
}
