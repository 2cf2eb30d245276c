//! Long-sequence extension: segment planning, soft-mask blending, and the
//! multi-diffusion, autoregressive and beam-search generators built on them.

mod generate;
mod masks;
mod plan;

pub use generate::{
    ar_context, ar_generate, ar_trajectory_blend, beam_extend, multidiffusion_solve, ArMode,
    ExtensionOptions,
};
pub use masks::{bartlett_window, mask_table, normalized_masks, raw_window, SoftMask, Window};
pub use plan::{plan_segments, SegmentPlan, DEFAULT_N_CTX, DEFAULT_N_HOP, DEFAULT_N_WIN};
