//! A small trainable velocity field: fully connected network with analytic
//! gradients, AdamW, the flow-matching training loop and checkpoints, plus
//! backbone token arithmetic (patchify and factorized positional embeddings).

mod adam;
mod checkpoint;
mod mlp;
mod tokens;
mod train;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use mlp::{
    gradient_check, mlp_backward, mlp_forward, time_features, Activation, MlpConfig, MlpVelocityField,
};
pub use tokens::{patchify, pos_embed, token_count, unpatchify, PatchSpec, PosEmbedSpec};
pub use train::{
    one_hot, sample_model, train_flow, two_gaussians, Dataset, LossPoint, TrainConfig, TrainOutcome,
    MIXTURE_CENTERS, MIXTURE_STD,
};
