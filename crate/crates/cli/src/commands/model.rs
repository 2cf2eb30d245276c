use serde_json::json;

use flowkit::model::{
    load_checkpoint, one_hot, sample_model, save_checkpoint, train_flow, two_gaussians, AdamConfig, MlpConfig,
    TrainConfig,
};
use flowkit::sampler::{parse_schedule, GuidanceConfig, Solver};
use flowkit::Rng;

use super::report;
use crate::args::{Cli, SampleArgs, SolverArg, TrainArgs};
use crate::output::{write_file, Output, Table};
use crate::Failure;

/// Stream forked from the root seed for the training data, apart from the
/// streams the trainer itself uses.
const DATA_STREAM: u64 = 3;

pub fn train(cli: &Cli, a: &TrainArgs) -> Result<Output, Failure> {
    let mut data = two_gaussians(a.dataset_size, &mut Rng::from_seed(cli.seed).fork(DATA_STREAM));
    if !a.conditional {
        data.labels = None;
        data.classes = 0;
    }
    let config = TrainConfig {
        steps: a.steps,
        batch: a.batch,
        model: MlpConfig {
            hidden: a.hidden.clone(),
            cond_dim: data.classes,
            ..MlpConfig::default()
        },
        adam: AdamConfig {
            lr: a.lr,
            weight_decay: a.weight_decay,
            ..AdamConfig::default()
        },
        log_every: a.log_every,
        cond_dropout: a.cond_dropout,
        seed: cli.seed,
        ..TrainConfig::default()
    };
    let outcome = train_flow(&data, &config)?;

    let ckpt = a.out.clone().unwrap_or_else(|| cli.out_dir.join("checkpoint.json"));
    save_checkpoint(&outcome.model, &ckpt)?;
    let mut table = Table::new(["step", "loss"]);
    for p in &outcome.trace {
        table.push([p.step.to_string(), p.loss.to_string()]);
    }
    let loss_path = cli.out_dir.join("loss.csv");
    write_file(&loss_path, &table.to_csv())?;

    let final_loss = outcome.trace.last().map(|p| p.loss);
    Ok(Output {
        report: report(
            cli,
            "train",
            json!({
                "checkpoint": ckpt,
                "loss_trace": loss_path,
                "parameters": outcome.model.params().len(),
                "final_loss": final_loss,
                "trace": outcome.trace,
            }),
        ),
        table,
    })
}

pub fn sample(cli: &Cli, a: &SampleArgs) -> Result<Output, Failure> {
    let model = load_checkpoint(&a.ckpt)?;
    let sched = parse_schedule(&a.schedule)?;
    let solver = match a.solver {
        SolverArg::Euler => Solver::Euler,
        SolverArg::Midpoint => Solver::Midpoint,
    };
    let classes = model.config().cond_dim;
    let cond = match a.class {
        None => None,
        Some(_) if classes == 0 => return Err(Failure::usage("--class needs a conditional checkpoint")),
        Some(c) if c >= classes => {
            return Err(Failure::usage(format!("--class {c} out of range for {classes} classes")))
        }
        Some(c) => Some(one_hot(c, classes)),
    };
    let guidance = match a.guidance {
        None => None,
        Some(_) if cond.is_none() => return Err(Failure::usage("--guidance needs --class")),
        Some(g) => Some(GuidanceConfig::new(g)?),
    };

    let dim = model.config().sample_dim;
    let samples: Vec<Vec<f64>> = if a.n == 0 {
        Vec::new()
    } else {
        let x = sample_model(
            &model,
            a.n,
            &sched,
            solver,
            cond.as_ref(),
            guidance.as_ref(),
            &mut Rng::from_seed(cli.seed),
        )?;
        x.data().chunks(dim).map(<[f64]>::to_vec).collect()
    };

    let samples_path = cli.out_dir.join("samples.json");
    let array = serde_json::to_string(&samples).expect("numbers serialize");
    write_file(&samples_path, &(array + "\n"))?;

    let mut table = Table::new((0..dim).map(|k| format!("x{k}")));
    for s in &samples {
        table.push(s);
    }
    Ok(Output {
        report: report(
            cli,
            "sample",
            json!({
                "schedule": sched.knots(),
                "samples_file": samples_path,
                "samples": samples,
            }),
        ),
        table,
    })
}
