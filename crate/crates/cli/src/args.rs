use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Seed used when neither `--seed` nor the config file sets one.
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Parser, Serialize)]
#[command(name = "flowkit", version, about = "Flow-matching toy experiments and evaluation statistics")]
pub struct Cli {
    /// Root seed; every random stream is forked from it.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Directory for written artifacts; created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,

    /// Report format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// JSON object whose keys mirror long flag names; flags given on the
    /// command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Train the toy MLP velocity field on a two-Gaussian mixture.
    Train(TrainArgs),
    /// Draw samples from a trained checkpoint.
    Sample(SampleArgs),
    /// Count diffusion tokens for a raw video size.
    Tokens(TokensArgs),
    /// Generate a long sequence with a toy field and report segment masks.
    Extend(ExtendArgs),
    /// Pairwise evaluation statistics from JSONL annotations.
    Eval(EvalArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 128)]
    pub batch: usize,
    /// Peak learning rate; a cosine decays it to a tenth by the last step.
    #[arg(long, default_value_t = 3e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.1)]
    pub weight_decay: f64,
    /// Hidden layer widths.
    #[arg(long, value_delimiter = ',', default_value = "64,64")]
    pub hidden: Vec<usize>,
    /// Points drawn from the mixture.
    #[arg(long, default_value_t = 4096)]
    pub dataset_size: usize,
    /// Condition on the mixture component (enables guidance at sampling).
    #[arg(long)]
    pub conditional: bool,
    /// Label dropout probability for conditional training.
    #[arg(long, default_value_t = 0.1)]
    pub cond_dropout: f64,
    #[arg(long, default_value_t = 100)]
    pub log_every: usize,
    /// Checkpoint path; defaults to `<out-dir>/checkpoint.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// `linear:N` or `linquad:S,N`.
    #[arg(long, default_value = "linquad:50,250")]
    pub schedule: String,
    #[arg(long, value_enum, default_value_t = SolverArg::Euler)]
    pub solver: SolverArg,
    /// Class label for a conditional checkpoint.
    #[arg(long)]
    pub class: Option<usize>,
    /// Classifier-free guidance scale; requires `--class`.
    #[arg(long)]
    pub guidance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverArg {
    Euler,
    Midpoint,
}

#[derive(Debug, Args, Serialize)]
pub struct TokensArgs {
    #[arg(long)]
    pub frames: usize,
    #[arg(long)]
    pub height: usize,
    #[arg(long)]
    pub width: usize,
    /// Autoencoder compression along time, height and width.
    #[arg(long, default_value_t = 8)]
    pub tae_factor: usize,
    /// Patch extent `kt,kh,kw` over the latent.
    #[arg(long, default_value = "1,2,2")]
    pub patch: String,
}

#[derive(Debug, Args, Serialize)]
pub struct ExtendArgs {
    #[arg(long, value_enum, default_value_t = ExtendMode::Md)]
    pub mode: ExtendMode,
    /// Total frames to generate.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 30)]
    pub hop: usize,
    #[arg(long, default_value_t = 10)]
    pub ctx: usize,
    #[arg(long, value_enum, default_value_t = WindowArg::Triangle)]
    pub window: WindowArg,
    /// Information passed between segments in `ar` and `beam` modes.
    #[arg(long, value_enum, default_value_t = ArModeArg::Both)]
    pub ar_mode: ArModeArg,
    /// Beam mode: candidates drawn per surviving prefix.
    #[arg(long, default_value_t = 1)]
    pub candidates: usize,
    /// Beam mode: prefixes kept after each segment.
    #[arg(long, default_value_t = 1)]
    pub beam: usize,
    /// Values per frame.
    #[arg(long, default_value_t = 4)]
    pub frame_dim: usize,
    #[arg(long, default_value = "linquad:50,250")]
    pub schedule: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtendMode {
    Md,
    Ar,
    Beam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowArg {
    Uniform,
    Triangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArModeArg {
    Context,
    Trajectory,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[command(subcommand)]
    pub stat: EvalStat,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalStat {
    /// Net win rate of model A over model B, with bootstrap interval.
    Nwt(NwtArgs),
    /// Elo ratings from battle records.
    Elo(EloArgs),
    /// Bradley-Terry regression with binned covariates.
    Bt(BtArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct NwtArgs {
    /// Vote file, one item per line.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Standard deviation of the win rate; enables the significance band.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Bootstrap resamples for the 95% interval; 0 disables it.
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,
    /// Per-item score: mean vote or plurality label.
    #[arg(long, value_enum, default_value_t = ItemScore::Consensus)]
    pub score: ItemScore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemScore {
    Consensus,
    Majority,
}

#[derive(Debug, Args, Serialize)]
pub struct EloArgs {
    /// Battle file, one record per line.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Prior precision on log-strengths; 0 gives the plain maximum likelihood.
    #[arg(long, default_value_t = 1e-2)]
    pub ridge: f64,
    /// Use classic sequential Elo updates with this K-factor instead of the
    /// order-independent maximum-likelihood fit.
    #[arg(long)]
    pub sequential_k: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct BtArgs {
    /// Vote file with `model_a`, `model_b` and optional `group`, `bin_a`, `bin_b`.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
}
