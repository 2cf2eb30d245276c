//! Temporal-autoencoder arithmetic: latent frame counts, the outlier penalty
//! loss, and tiled encode/decode with crossfaded overlaps.

mod frames;
mod opl;
mod tiling;

pub use frames::{assign_duration_bucket, latent_frame_count, spurious_frames, DurationBucket};
pub use opl::{opl_loss, DEFAULT_OPL_RADIUS, DEFAULT_OPL_WEIGHT};
pub use tiling::{
    blend_stitch, blend_weights, default_plans, plan_tiles, tiled_apply, untiled_apply, Codec,
    CodecSpec, IdentityCodec, PoolCodec, ScaleCodec, TilePlan, DEFAULT_DECODE_OVERLAP_RAW_FRAMES,
    DEFAULT_TILE_RAW_FRAMES,
};
