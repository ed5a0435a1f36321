//! JSON checkpoints.
//!
//! ```json
//! {
//!   "format": "fuzhash-mlp/1",
//!   "precision": "f64",
//!   "config": { MlpConfig },
//!   "layers": [{ "shape": [fan_in, fan_out], "weights": [row-major], "bias": [..],
//!                "batch_norm": { "gamma", "beta", "running_mean", "running_var" } | null }],
//!   "optimizer": { NadamState } | null,
//!   "history": [epoch losses],
//!   "echo": any
//! }
//! ```
//!
//! Values are stored as `f64`, which holds `f32` parameters exactly.

use std::any::TypeId;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::config::MlpConfig;
use super::mlp::{BatchNorm, Dense, Mlp};
use super::optim::NadamState;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const CHECKPOINT_FORMAT: &str = "fuzhash-mlp/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchNormParams {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerParams {
    pub shape: [usize; 2],
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub batch_norm: Option<BatchNormParams>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub precision: String,
    pub config: MlpConfig,
    pub layers: Vec<LayerParams>,
    pub optimizer: Option<NadamState>,
    #[serde(default)]
    pub history: Vec<f64>,
    #[serde(default)]
    pub echo: serde_json::Value,
}

fn precision<T: 'static>() -> &'static str {
    if TypeId::of::<T>() == TypeId::of::<f32>() {
        "f32"
    } else {
        "f64"
    }
}

fn to_f64<T: Scalar>(a: impl IntoIterator<Item = T>) -> Vec<f64> {
    a.into_iter().map(|v| v.to_f64_lossy()).collect()
}

fn from_f64<T: Scalar>(v: &[f64]) -> Array1<T> {
    v.iter().map(|&x| T::of(x)).collect()
}

impl Checkpoint {
    pub fn capture<T: Scalar>(
        model: &Mlp<T>,
        optimizer: Option<&NadamState>,
        history: &[f64],
    ) -> Self {
        let layers = model
            .layers()
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let (r, c) = l.weights.dim();
                LayerParams {
                    shape: [r, c],
                    weights: to_f64(l.weights.iter().copied()),
                    bias: to_f64(l.bias.iter().copied()),
                    batch_norm: model.norms().get(i).map(|n| BatchNormParams {
                        gamma: to_f64(n.gamma.iter().copied()),
                        beta: to_f64(n.beta.iter().copied()),
                        running_mean: to_f64(n.running_mean.iter().copied()),
                        running_var: to_f64(n.running_var.iter().copied()),
                    }),
                }
            })
            .collect();
        Self {
            format: CHECKPOINT_FORMAT.into(),
            precision: precision::<T>().into(),
            config: model.config().clone(),
            layers,
            optimizer: optimizer.cloned(),
            history: history.to_vec(),
            echo: serde_json::Value::Null,
        }
    }

    pub fn restore<T: Scalar>(&self) -> Result<Mlp<T>> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(Error::Parse(format!(
                "unknown checkpoint format `{}`",
                self.format
            )));
        }
        let mut dense = vec![];
        let mut norms = vec![];
        for l in &self.layers {
            let weights = Array2::from_shape_vec((l.shape[0], l.shape[1]), l.weights.clone())
                .map_err(|e| Error::Shape(format!("checkpoint weights: {e}")))?
                .mapv(T::of);
            dense.push(Dense {
                weights,
                bias: from_f64(&l.bias),
            });
            if let Some(bn) = &l.batch_norm {
                norms.push(BatchNorm {
                    gamma: from_f64(&bn.gamma),
                    beta: from_f64(&bn.beta),
                    running_mean: from_f64(&bn.running_mean),
                    running_var: from_f64(&bn.running_var),
                });
            }
        }
        Mlp::from_parts(self.config.clone(), dense, norms)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoints serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
