use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::Algebra;
use crate::hash::{HashSpec, MaskSpec};
use crate::neural::{check_binding, LossKind, MlpConfig, TrainConfig};

/// Scalar type of the network. Hash circuits always run in `f64`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

fn d_test() -> usize {
    1024
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

/// One inversion experiment: hash, mask, network, training and testing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub spec: HashSpec,
    /// Defaults to every hash bit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<MaskSpec>,
    pub message_bits: usize,
    pub mlp: MlpConfig,
    pub train: TrainConfig,
    #[serde(default = "d_test")]
    pub test_set_size: usize,
    #[serde(default)]
    pub test_seed: u64,
    #[serde(default, skip_serializing_if = "is_default")]
    pub precision: Precision,
    /// Where the CLI writes artifacts when no directory is given on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn mask(&self) -> MaskSpec {
        self.mask
            .clone()
            .unwrap_or_else(|| MaskSpec::full(self.spec.out_bits()))
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.message_bits == 0 {
            return Err(Error::Config("message_bits must be positive".into()));
        }
        if let Some(fixed) = self.spec.algorithm.fixed_message_bits() {
            if fixed != self.message_bits {
                return Err(Error::Config(format!(
                    "{} takes {fixed}-bit messages, got message_bits = {}",
                    self.spec.algorithm, self.message_bits
                )));
            }
        }
        check_binding(&self.mlp, &self.spec, &self.mask(), self.message_bits)?;
        self.train.validate()?;
        if self.spec.algebra == Algebra::Circular
            && (self.train.loss == LossKind::Bce || self.train.binarization_penalty > 0.0)
        {
            return Err(Error::Config(
                "bce loss and the binarization penalty need the unit algebra".into(),
            ));
        }
        if self.test_set_size == 0 {
            return Err(Error::Config("test_set_size must be positive".into()));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::Algorithm;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            name: "t".into(),
            description: String::new(),
            spec: HashSpec::new(Algorithm::Sha1).with_rounds(1),
            mask: None,
            message_bits: 32,
            mlp: MlpConfig::new(vec![160, 8, 32]),
            train: TrainConfig::default(),
            test_set_size: 16,
            test_seed: 1,
            precision: Precision::F64,
            output_dir: None,
        }
    }

    #[test]
    fn validation() {
        assert!(base().validate().is_ok());
        let mut c = base();
        c.message_bits = 33;
        assert!(c.validate().is_err());
        let mut c = base();
        c.mask = Some(MaskSpec::new(vec![160]).unwrap());
        assert!(c.validate().is_err());
        let mut c = base();
        c.spec = HashSpec::new(Algorithm::AddToy);
        assert!(c.validate().is_err());
        let mut c = base();
        c.spec.algebra = Algebra::Circular;
        c.train.loss = LossKind::Bce;
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_round_trip_and_masks_as_text() {
        let c = base();
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
        let mut v: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
        v["mask"] = "0-7,20".into();
        let c2 = ExperimentConfig::from_json(&v.to_string()).unwrap();
        assert_eq!(c2.mask().len(), 9);
        v["unexpected"] = 1.into();
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
    }
}
