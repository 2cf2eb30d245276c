use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::mlp::{mlp_backward, MlpConfig, MlpVelocityField};
use crate::error::{Error, Result};
use crate::flow::{make_training_batch, DEFAULT_SIGMA_MIN};
use crate::numerics::{sample_standard_normal, Rng, Tensor};
use crate::sampler::{solve, GuidanceConfig, Solver, TimeSchedule};

/// Points with optional class labels in `0..classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Vec<Tensor>,
    pub labels: Option<Vec<usize>>,
    pub classes: usize,
}

impl Dataset {
    pub fn unlabeled(points: Vec<Tensor>) -> Self {
        Self {
            points,
            labels: None,
            classes: 0,
        }
    }
}

pub const MIXTURE_CENTERS: [[f64; 2]; 2] = [[-2.0, 0.0], [2.0, 0.0]];
pub const MIXTURE_STD: f64 = 0.25;

/// `n` points from the equal-weight mixture of `N((-2, 0), σ²I)` and
/// `N((2, 0), σ²I)` with σ = 0.25. Point `i` belongs to component `i mod 2`,
/// which is also its label.
pub fn two_gaussians(n: usize, rng: &mut Rng) -> Dataset {
    let mut labels = Vec::with_capacity(n);
    let points = (0..n)
        .map(|i| {
            let c = MIXTURE_CENTERS[i % 2];
            labels.push(i % 2);
            let z = sample_standard_normal(rng, &[2]);
            Tensor::from_slice(&[c[0] + MIXTURE_STD * z.data()[0], c[1] + MIXTURE_STD * z.data()[1]])
        })
        .collect();
    Dataset {
        points,
        labels: Some(labels),
        classes: 2,
    }
}

pub fn one_hot(label: usize, classes: usize) -> Tensor {
    let mut t = Tensor::zeros(&[classes]);
    if label < classes {
        t.data_mut()[label] = 1.0;
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch: usize,
    pub model: MlpConfig,
    pub adam: AdamConfig,
    /// Learning rate at the last step as a fraction of `adam.lr`; the rate
    /// follows a cosine from `adam.lr` down to this floor.
    pub final_lr_fraction: f64,
    pub sigma_min: f64,
    /// Loss trace granularity: one entry per `log_every` steps.
    pub log_every: usize,
    /// Probability of replacing a sample's label with the null condition.
    pub cond_dropout: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            steps: 8000,
            batch: 128,
            model: MlpConfig::default(),
            adam: AdamConfig::default(),
            final_lr_fraction: 0.1,
            sigma_min: DEFAULT_SIGMA_MIN,
            log_every: 100,
            cond_dropout: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 || self.batch == 0 || self.log_every == 0 {
            return Err(Error::invalid("steps, batch and log_every must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.cond_dropout) || !(0.0..=1.0).contains(&self.final_lr_fraction) {
            return Err(Error::invalid("cond_dropout and final_lr_fraction must lie in [0, 1]"));
        }
        if !(self.sigma_min >= 0.0 && self.sigma_min < 1.0) {
            return Err(Error::invalid(format!("sigma_min {} outside [0, 1)", self.sigma_min)));
        }
        self.adam.validate()
    }

    fn lr_at(&self, step: usize) -> f64 {
        let progress = if self.steps > 1 {
            step as f64 / (self.steps - 1) as f64
        } else {
            0.0
        };
        let floor = self.final_lr_fraction;
        self.adam.lr * (floor + (1.0 - floor) * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossPoint {
    /// Number of optimizer steps completed.
    pub step: usize,
    /// Mean batch loss over the steps since the previous entry.
    pub loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MlpVelocityField,
    pub trace: Vec<LossPoint>,
}

/// Trains a velocity field by flow matching on `data`.
///
/// The model is conditional when `config.model.cond_dim > 0`; it then must
/// equal `data.classes` and labels are fed one-hot. Random streams forked
/// from `config.seed`: 0 initializes weights, 1 draws batches, 2 drives
/// label dropout.
pub fn train_flow(data: &Dataset, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let dim = config.model.sample_dim;
    if data.points.is_empty() {
        return Err(Error::EmptyInput("dataset"));
    }
    if let Some(bad) = data.points.iter().find(|p| p.shape() != [dim]) {
        return Err(Error::ShapeMismatch {
            expected: vec![dim],
            found: bad.shape().to_vec(),
        });
    }
    let conditional = config.model.cond_dim > 0;
    let labels = match (&data.labels, conditional) {
        (Some(l), true) if config.model.cond_dim == data.classes && l.len() == data.points.len() => Some(l),
        (_, true) => {
            return Err(Error::invalid(format!(
                "conditional model with cond_dim {} needs {} labels over as many classes",
                config.model.cond_dim,
                data.points.len()
            )))
        }
        (_, false) => None,
    };

    let root = Rng::from_seed(config.seed);
    let mut model = MlpVelocityField::init(config.model.clone(), &mut root.fork(0))?;
    let mut batch_rng = root.fork(1);
    let mut drop_rng = root.fork(2);
    let mut adam = AdamState::new(config.adam, model.params().len())?;
    let null = Tensor::zeros(&[config.model.cond_dim]);

    let mut trace = Vec::with_capacity(config.steps / config.log_every + 1);
    let mut window = (0.0, 0usize);
    for step in 0..config.steps {
        let batch = make_training_batch(&data.points, config.batch, &mut batch_rng, config.sigma_min)?;
        let conds: Option<Vec<Tensor>> = labels.map(|l| {
            batch
                .iter()
                .map(|s| {
                    if drop_rng.uniform() < config.cond_dropout {
                        null.clone()
                    } else {
                        one_hot(l[s.index], data.classes)
                    }
                })
                .collect()
        });
        let (loss, grad) = mlp_backward(&model, &batch, conds.as_deref())?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Divergence { step, loss });
        }
        adam.update_with_lr(model.params_mut(), &grad, config.lr_at(step))?;

        window = (window.0 + loss, window.1 + 1);
        if (step + 1) % config.log_every == 0 || step + 1 == config.steps {
            trace.push(LossPoint {
                step: step + 1,
                loss: window.0 / window.1 as f64,
            });
            window = (0.0, 0);
        }
    }
    if !model.params().iter().all(|p| p.is_finite()) {
        return Err(Error::Divergence {
            step: config.steps,
            loss: f64::NAN,
        });
    }
    Ok(TrainOutcome { model, trace })
}

/// Integrates `n` fresh noise draws from `t = 0` to `t = 1` under `model`,
/// returning an `[n, d]` tensor. `cond` is shared by every sample.
pub fn sample_model(
    model: &MlpVelocityField,
    n: usize,
    sched: &TimeSchedule,
    solver: Solver,
    cond: Option<&Tensor>,
    guidance: Option<&GuidanceConfig>,
    rng: &mut Rng,
) -> Result<Tensor> {
    let x0 = sample_standard_normal(rng, &[n, model.config().sample_dim]);
    solve(solver, model, &x0, sched, cond, guidance)
}
