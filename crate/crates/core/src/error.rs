use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("empty reduction")]
    EmptyReduction,

    #[error("empty loss")]
    EmptyLoss,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("no bucket for duration {duration_s}s at {fps} fps")]
    NoBucket { duration_s: f64, fps: f64 },

    #[error("index {index} out of range for axis of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("comparison graph is disconnected: {}", format_components(.components))]
    Disconnected { components: Vec<Vec<String>> },

    #[error("model `{0}` has no comparisons")]
    NoComparisons(String),

    #[error("design matrix is rank deficient after anchoring")]
    RankDeficient,

    #[error("optimizer did not converge after {iterations} iterations (gradient norm {grad_norm:e})")]
    NonConvergence { iterations: usize, grad_norm: f64 },

    #[error("training diverged at step {step} (loss {loss})")]
    Divergence { step: usize, loss: f64 },

    #[error("scorer returned a non-finite value ({0})")]
    NonFiniteScore(f64),

    #[error("unsupported checkpoint format version {0}")]
    UnsupportedVersion(u32),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of the numerics themselves (divergence, non-convergence,
    /// non-finite values), as opposed to bad input or configuration.
    pub fn is_numeric_failure(&self) -> bool {
        matches!(
            self,
            Error::Divergence { .. }
                | Error::NonConvergence { .. }
                | Error::NonFiniteScore(_)
                | Error::RankDeficient
        )
    }
}

fn format_components(components: &[Vec<String>]) -> String {
    components
        .iter()
        .map(|c| format!("{{{}}}", c.join(", ")))
        .collect::<Vec<_>>()
        .join(" | ")
}
