use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::mlp::{Activation, MlpConfig, MlpVelocityField};
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

/// On-disk checkpoint, stored as JSON.
///
/// `params` is the flat parameter vector (see [`MlpVelocityField`] for the
/// layout) encoded as standard base64 over consecutive little-endian IEEE-754
/// 64-bit floats, so values roundtrip bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub layer_widths: Vec<usize>,
    pub sample_dim: usize,
    pub cond_dim: usize,
    pub time_freqs: usize,
    pub activation: Activation,
    pub params: String,
}

impl Checkpoint {
    pub fn from_model(model: &MlpVelocityField) -> Self {
        let c = model.config();
        let bytes: Vec<u8> = model.params().iter().flat_map(|p| p.to_le_bytes()).collect();
        Self {
            format_version: CHECKPOINT_VERSION,
            layer_widths: c.layer_widths(),
            sample_dim: c.sample_dim,
            cond_dim: c.cond_dim,
            time_freqs: c.time_freqs,
            activation: c.activation,
            params: STANDARD.encode(bytes),
        }
    }

    pub fn into_model(self) -> Result<MlpVelocityField> {
        if self.format_version != CHECKPOINT_VERSION {
            return Err(Error::UnsupportedVersion(self.format_version));
        }
        let w = &self.layer_widths;
        if w.len() < 2 {
            return Err(Error::invalid("checkpoint needs at least two layer widths"));
        }
        let config = MlpConfig {
            sample_dim: self.sample_dim,
            cond_dim: self.cond_dim,
            time_freqs: self.time_freqs,
            hidden: w[1..w.len() - 1].to_vec(),
            activation: self.activation,
        };
        if config.layer_widths() != *w {
            return Err(Error::invalid(format!(
                "layer widths {w:?} disagree with sample_dim/cond_dim/time_freqs"
            )));
        }
        let bytes = STANDARD
            .decode(&self.params)
            .map_err(|e| Error::invalid(format!("checkpoint params: {e}")))?;
        if bytes.len() % 8 != 0 {
            return Err(Error::invalid("checkpoint params are not whole 64-bit floats"));
        }
        let params = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        MlpVelocityField::from_params(config, params)
    }
}

pub fn save_checkpoint(model: &MlpVelocityField, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(&Checkpoint::from_model(model))?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<MlpVelocityField> {
    let text = std::fs::read_to_string(path)?;
    let ckpt: Checkpoint = serde_json::from_str(&text)?;
    ckpt.into_model()
}
