use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenActivation {
    #[default]
    Elu,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    /// `1 / (1 + e^-x)`
    #[default]
    Sigmoid,
    /// `min(max(0, x/5 + 1/2), 1)`
    HardSigmoid,
}

/// Where batch normalization sits inside a hidden layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchNormPlacement {
    /// affine, ELU, batch norm
    #[default]
    AfterActivation,
    /// affine, batch norm, ELU
    BeforeActivation,
}

/// How the `(0, 1)` network outputs become circular fuzbits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircularEmbedding {
    /// Used as they are, since `(0, 1)` lies inside `(-1, 1]`.
    #[default]
    Direct,
    /// `2y - 1`
    Affine,
}

fn yes() -> bool {
    true
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// Shape and options of a fully-connected network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpConfig {
    /// Input size, hidden sizes, output size.
    pub layer_sizes: Vec<usize>,
    #[serde(default)]
    pub hidden_activation: HiddenActivation,
    #[serde(default)]
    pub output_activation: OutputActivation,
    #[serde(default = "yes")]
    pub batch_norm: bool,
    #[serde(default)]
    pub batch_norm_placement: BatchNormPlacement,
    #[serde(default)]
    pub circular_embedding: CircularEmbedding,
    /// Inverted-dropout rate on hidden outputs while training.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub dropout: f64,
    #[serde(default)]
    pub init_seed: u64,
}

impl MlpConfig {
    pub fn new(layer_sizes: Vec<usize>) -> Self {
        Self {
            layer_sizes,
            hidden_activation: HiddenActivation::Elu,
            output_activation: OutputActivation::Sigmoid,
            batch_norm: true,
            batch_norm_placement: BatchNormPlacement::AfterActivation,
            circular_embedding: CircularEmbedding::Direct,
            dropout: 0.0,
            init_seed: 0,
        }
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes.first().copied().unwrap_or(0)
    }

    pub fn output_size(&self) -> usize {
        self.layer_sizes.last().copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 {
            return Err(Error::Config(
                "layer_sizes needs at least an input and an output size".into(),
            ));
        }
        if self.layer_sizes.contains(&0) {
            return Err(Error::Config("layer sizes must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!(
                "dropout must be in [0, 1), got {}",
                self.dropout
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `sum |h - h'|` over the mask
    #[default]
    L1,
    /// Binary cross-entropy averaged over the mask.
    Bce,
    /// `sum rho(h, h')` over the mask, with the angular distance `rho`.
    CircularAngular,
}

/// What the network sees as input during training.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    /// Hashes of random messages (general inverter).
    #[default]
    Hashes,
    /// Random bit strings, reachable as hashes or not.
    RandomStrings,
    /// One fixed hash, as hex, repeated in every sample (single inverter).
    SingleHash(String),
}

impl InputMode {
    /// The fixed hash of [`InputMode::SingleHash`], truncated to `k` bits.
    pub fn single_hash(&self, k: usize) -> Result<Option<BitVector>> {
        match self {
            InputMode::SingleHash(hex) => {
                let bits = BitVector::from_hex(hex)?;
                if bits.len() < k {
                    return Err(Error::Config(format!(
                        "single hash has {} bits, the hash needs {k}",
                        bits.len()
                    )));
                }
                Ok(Some(bits.slice(0..k)))
            }
            _ => Ok(None),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    /// Adam with Nesterov momentum and a scheduled momentum warm-up.
    #[default]
    Nadam,
    Adam,
}

fn d_samples() -> usize {
    1024
}
fn d_batch() -> usize {
    64
}
fn d_lr() -> f64 {
    0.002
}
fn d_beta1() -> f64 {
    0.9
}
fn d_beta2() -> f64 {
    0.999
}
fn d_eps() -> f64 {
    1e-8
}

/// Training loop settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default = "d_samples")]
    pub samples_per_epoch: usize,
    #[serde(default = "d_batch")]
    pub batch_size: usize,
    pub epochs: usize,
    #[serde(default = "d_lr")]
    pub learning_rate: f64,
    #[serde(default)]
    pub loss: LossKind,
    /// Weight of `sum min(m', 1 - m')` over the predicted message.
    #[serde(default)]
    pub binarization_penalty: f64,
    #[serde(default)]
    pub input_mode: InputMode,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub optimizer: OptimizerKind,
    #[serde(default = "d_beta1")]
    pub beta1: f64,
    #[serde(default = "d_beta2")]
    pub beta2: f64,
    #[serde(default = "d_eps")]
    pub epsilon: f64,
    /// Reuse the first epoch's messages in every epoch.
    #[serde(default)]
    pub fixed_training_set: bool,
    /// L2 penalty coefficient on weight matrices.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub weight_decay: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            samples_per_epoch: d_samples(),
            batch_size: d_batch(),
            epochs: 10,
            learning_rate: d_lr(),
            loss: LossKind::L1,
            binarization_penalty: 0.0,
            input_mode: InputMode::Hashes,
            rng_seed: 0,
            optimizer: OptimizerKind::Nadam,
            beta1: d_beta1(),
            beta2: d_beta2(),
            epsilon: d_eps(),
            fixed_training_set: false,
            weight_decay: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn batches_per_epoch(&self) -> usize {
        self.samples_per_epoch / self.batch_size.max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.batch_size == 0 || self.samples_per_epoch == 0 {
            return bad("batch_size and samples_per_epoch must be positive".into());
        }
        if !self.samples_per_epoch.is_multiple_of(self.batch_size) {
            return bad(format!(
                "batch_size {} does not divide samples_per_epoch {}",
                self.batch_size, self.samples_per_epoch
            ));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning_rate must be >= 0, got {}",
                self.learning_rate
            ));
        }
        if !(self.binarization_penalty >= 0.0 && self.weight_decay >= 0.0) {
            return bad("binarization_penalty and weight_decay must be >= 0".into());
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return bad("beta1 and beta2 must be in [0, 1)".into());
        }
        if self.epsilon <= 0.0 {
            return bad("epsilon must be positive".into());
        }
        Ok(())
    }
}
