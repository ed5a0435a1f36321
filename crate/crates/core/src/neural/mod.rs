//! Inverting networks trained through the fuzzy hash.

mod checkpoint;
mod config;
mod loss;
mod mlp;
mod optim;
mod train;

pub use checkpoint::{BatchNormParams, Checkpoint, LayerParams, CHECKPOINT_FORMAT};
pub use config::{
    BatchNormPlacement, CircularEmbedding, HiddenActivation, InputMode, LossKind, MlpConfig,
    OptimizerKind, OutputActivation, TrainConfig,
};
pub use loss::{binarization_penalty, loss, BCE_CLAMP};
pub use mlp::{
    BatchNorm, Dense, ForwardCache, Gradients, Mlp, ParamBlock, BN_EPSILON, BN_MOMENTUM,
};
pub use optim::NadamState;
pub use train::{
    check_binding, embed_output, hash_rows, loss_history_csv, random_messages, Trainer,
};
