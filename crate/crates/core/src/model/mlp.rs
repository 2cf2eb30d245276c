use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowSample;
use crate::numerics::{Rng, Tensor};
use crate::sampler::VelocityField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output.
    fn slope(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }
}

/// Network shape. The input row is `[x, time features, cond]` with
/// `2·time_freqs` sinusoidal time features and `cond_dim` conditioning slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub sample_dim: usize,
    pub cond_dim: usize,
    pub time_freqs: usize,
    pub hidden: Vec<usize>,
    pub activation: Activation,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            sample_dim: 2,
            cond_dim: 0,
            time_freqs: 4,
            hidden: vec![64, 64],
            activation: Activation::Tanh,
        }
    }
}

impl MlpConfig {
    pub fn input_dim(&self) -> usize {
        self.sample_dim + 2 * self.time_freqs + self.cond_dim
    }

    /// `[input, hidden..., sample_dim]`.
    pub fn layer_widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_dim()];
        w.extend(&self.hidden);
        w.push(self.sample_dim);
        w
    }

    pub fn param_count(&self) -> usize {
        self.layer_widths().windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    fn validate(&self) -> Result<()> {
        if self.sample_dim == 0 || self.hidden.contains(&0) {
            return Err(Error::invalid("layer widths must be >= 1"));
        }
        Ok(())
    }
}

/// `[sin(π·2^k·t), cos(π·2^k·t)]` for `k = 0..freqs`.
pub fn time_features(t: f64, freqs: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * freqs);
    for k in 0..freqs {
        let (s, c) = (std::f64::consts::PI * (1u64 << k) as f64 * t).sin_cos();
        out.push(s);
        out.push(c);
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Layer {
    w: usize,
    b: usize,
    n_in: usize,
    n_out: usize,
}

/// Fully connected velocity field with parameters in one flat vector.
///
/// Layer `l` stores its weight matrix row-major (`n_out × n_in`) followed by
/// its bias. Hidden layers use the configured activation; the output layer
/// is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpVelocityField {
    config: MlpConfig,
    params: Vec<f64>,
}

impl MlpVelocityField {
    pub fn zeros(config: MlpConfig) -> Result<Self> {
        config.validate()?;
        let params = vec![0.0; config.param_count()];
        Ok(Self { config, params })
    }

    /// Weights `~ N(0, 1/n_in)`, biases zero.
    pub fn init(config: MlpConfig, rng: &mut Rng) -> Result<Self> {
        let mut model = Self::zeros(config)?;
        for layer in model.layers() {
            let scale = (1.0 / layer.n_in.max(1) as f64).sqrt();
            for p in &mut model.params[layer.w..layer.b] {
                *p = scale * rng.standard_normal();
            }
        }
        Ok(model)
    }

    pub fn from_params(config: MlpConfig, params: Vec<f64>) -> Result<Self> {
        config.validate()?;
        if params.len() != config.param_count() {
            return Err(Error::ShapeMismatch {
                expected: vec![config.param_count()],
                found: vec![params.len()],
            });
        }
        Ok(Self { config, params })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn layers(&self) -> Vec<Layer> {
        let mut offset = 0;
        self.config
            .layer_widths()
            .windows(2)
            .map(|w| {
                let layer = Layer {
                    w: offset,
                    b: offset + w[0] * w[1],
                    n_in: w[0],
                    n_out: w[1],
                };
                offset = layer.b + w[1];
                layer
            })
            .collect()
    }

    /// Parameter ranges of every weight matrix and bias vector, in storage order.
    pub fn param_tensors(&self) -> Vec<std::ops::Range<usize>> {
        self.layers()
            .iter()
            .flat_map(|l| [l.w..l.b, l.b..l.b + l.n_out])
            .collect()
    }

    fn input_row(&self, x: &[f64], t: f64, cond: Option<&[f64]>) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.config.input_dim());
        row.extend_from_slice(x);
        row.extend(time_features(t, self.config.time_freqs));
        match cond {
            Some(c) => row.extend_from_slice(c),
            None => row.resize(self.config.input_dim(), 0.0),
        }
        row
    }

    /// Activations of every layer for one input row; the last entry is the output.
    fn forward_row(&self, layers: &[Layer], input: Vec<f64>) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(layers.len() + 1);
        acts.push(input);
        for (l, layer) in layers.iter().enumerate() {
            let a = &acts[l];
            let hidden = l + 1 < layers.len();
            let out: Vec<f64> = (0..layer.n_out)
                .map(|o| {
                    let w = &self.params[layer.w + o * layer.n_in..layer.w + (o + 1) * layer.n_in];
                    let z = self.params[layer.b + o] + w.iter().zip(a).map(|(w, a)| w * a).sum::<f64>();
                    if hidden {
                        self.config.activation.apply(z)
                    } else {
                        z
                    }
                })
                .collect();
            acts.push(out);
        }
        acts
    }

    /// Adds the gradient of `Σ_o delta_o · output_o` for one row into `grad`.
    fn backward_row(&self, layers: &[Layer], acts: &[Vec<f64>], mut delta: Vec<f64>, grad: &mut [f64]) {
        for (l, layer) in layers.iter().enumerate().rev() {
            let a = &acts[l];
            for (o, &d) in delta.iter().enumerate() {
                grad[layer.b + o] += d;
                let g = &mut grad[layer.w + o * layer.n_in..layer.w + (o + 1) * layer.n_in];
                g.iter_mut().zip(a).for_each(|(g, a)| *g += d * a);
            }
            if l == 0 {
                break;
            }
            delta = (0..layer.n_in)
                .map(|i| {
                    let back: f64 = delta
                        .iter()
                        .enumerate()
                        .map(|(o, d)| d * self.params[layer.w + o * layer.n_in + i])
                        .sum();
                    back * self.config.activation.slope(a[i])
                })
                .collect();
        }
    }
}

/// Splits `x` into rows of `width`; a rank-1 tensor is one row.
fn rows_of(x: &Tensor, width: usize) -> Result<usize> {
    match x.shape() {
        [d] if *d == width => Ok(1),
        [_, d] if *d == width => Ok(x.shape()[0]),
        other => Err(Error::ShapeMismatch {
            expected: vec![width],
            found: other.to_vec(),
        }),
    }
}

/// Evaluates the network on `x` of shape `[d]` or `[B, d]`. `cond` is either
/// one `[cond_dim]` vector shared by all rows or `[B, cond_dim]`; `None` feeds
/// zeros, which is the unconditional input.
pub fn mlp_forward(model: &MlpVelocityField, x: &Tensor, t: f64, cond: Option<&Tensor>) -> Result<Tensor> {
    let d = model.config.sample_dim;
    let rows = rows_of(x, d)?;
    let cond_row = |r: usize| -> Result<Option<&[f64]>> {
        let Some(c) = cond else { return Ok(None) };
        let cd = model.config.cond_dim;
        match c.shape() {
            [n] if *n == cd => Ok(Some(c.data())),
            [b, n] if *n == cd && *b == rows => Ok(Some(&c.data()[r * cd..(r + 1) * cd])),
            other => Err(Error::ShapeMismatch {
                expected: vec![rows, cd],
                found: other.to_vec(),
            }),
        }
    };
    let layers = model.layers();
    let mut out = Vec::with_capacity(x.len());
    for r in 0..rows {
        let input = model.input_row(&x.data()[r * d..(r + 1) * d], t, cond_row(r)?);
        let mut acts = model.forward_row(&layers, input);
        out.append(acts.last_mut().expect("at least one layer"));
    }
    Tensor::new(x.shape().to_vec(), out)
}

/// Flow-matching loss of `model` on `batch` and its exact gradient with
/// respect to every parameter. `conds`, when given, holds one conditioning
/// vector per sample.
pub fn mlp_backward(
    model: &MlpVelocityField,
    batch: &[FlowSample],
    conds: Option<&[Tensor]>,
) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::EmptyLoss);
    }
    if let Some(c) = conds {
        if c.len() != batch.len() {
            return Err(Error::invalid(format!("{} conditions for {} samples", c.len(), batch.len())));
        }
    }
    let d = model.config.sample_dim;
    let norm = (batch.len() * d) as f64;
    let layers = model.layers();
    let mut grad = vec![0.0; model.params.len()];
    let mut sse = 0.0;
    for (i, s) in batch.iter().enumerate() {
        rows_of(&s.xt, d)?;
        s.xt.ensure_same_shape(&s.vt)?;
        if s.xt.rank() != 1 {
            return Err(Error::ShapeMismatch {
                expected: vec![d],
                found: s.xt.shape().to_vec(),
            });
        }
        let cond = match conds {
            Some(c) => {
                if c[i].shape() != [model.config.cond_dim] {
                    return Err(Error::ShapeMismatch {
                        expected: vec![model.config.cond_dim],
                        found: c[i].shape().to_vec(),
                    });
                }
                Some(c[i].data())
            }
            None => None,
        };
        let acts = model.forward_row(&layers, model.input_row(s.xt.data(), s.t, cond));
        let pred = acts.last().expect("at least one layer");
        let delta: Vec<f64> = pred
            .iter()
            .zip(s.vt.data())
            .map(|(p, v)| {
                sse += (p - v) * (p - v);
                2.0 * (p - v) / norm
            })
            .collect();
        model.backward_row(&layers, &acts, delta, &mut grad);
    }
    Ok((sse / norm, grad))
}

/// Largest per-tensor relative error between the analytic gradient and
/// central finite differences with step `h`. Each parameter tensor's error is
/// `max|analytic - numeric| / max(max|analytic|, max|numeric|)`.
pub fn gradient_check(
    model: &MlpVelocityField,
    batch: &[FlowSample],
    conds: Option<&[Tensor]>,
    h: f64,
) -> Result<f64> {
    let (_, grad) = mlp_backward(model, batch, conds)?;
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for range in model.param_tensors() {
        let (mut diff, mut scale) = (0.0f64, 0.0f64);
        for p in range {
            let orig = probe.params[p];
            probe.params[p] = orig + h;
            let up = mlp_backward(&probe, batch, conds)?.0;
            probe.params[p] = orig - h;
            let down = mlp_backward(&probe, batch, conds)?.0;
            probe.params[p] = orig;
            let numeric = (up - down) / (2.0 * h);
            diff = diff.max((grad[p] - numeric).abs());
            scale = scale.max(grad[p].abs()).max(numeric.abs());
        }
        if scale > 0.0 {
            worst = worst.max(diff / scale);
        }
    }
    Ok(worst)
}

impl VelocityField for MlpVelocityField {
    fn velocity(&self, x: &Tensor, t: f64, cond: Option<&Tensor>) -> Result<Tensor> {
        mlp_forward(self, x, t, cond)
    }
}
