//! Shipped experiment configs, one per published result.

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// `(name, JSON)` of every shipped config.
pub const PRESETS: &[(&str, &str)] = &[
    ("add-toy", include_str!("../../configs/add-toy.json")),
    (
        "sha1-r1-m32",
        include_str!("../../configs/sha1-r1-m32.json"),
    ),
    (
        "sha1-r2-m64",
        include_str!("../../configs/sha1-r2-m64.json"),
    ),
    (
        "sha1-addxor-r2",
        include_str!("../../configs/sha1-addxor-r2.json"),
    ),
    (
        "sha1-r3-mask0-7",
        include_str!("../../configs/sha1-r3-mask0-7.json"),
    ),
    (
        "sha1-roundstate",
        include_str!("../../configs/sha1-roundstate.json"),
    ),
    ("md5-r1", include_str!("../../configs/md5-r1.json")),
    ("md5-r2", include_str!("../../configs/md5-r2.json")),
    ("md5-r4", include_str!("../../configs/md5-r4.json")),
    ("sha2-r1", include_str!("../../configs/sha2-r1.json")),
    ("sha2-r2", include_str!("../../configs/sha2-r2.json")),
    ("sha2-r4", include_str!("../../configs/sha2-r4.json")),
    (
        "keccak256-r1-m64",
        include_str!("../../configs/keccak256-r1-m64.json"),
    ),
    (
        "keccak128-r1-m256",
        include_str!("../../configs/keccak128-r1-m256.json"),
    ),
    (
        "keccak256-r2-m16",
        include_str!("../../configs/keccak256-r2-m16.json"),
    ),
    (
        "keccak-notheta-r6",
        include_str!("../../configs/keccak-notheta-r6.json"),
    ),
    (
        "keccak-onlychi-r6",
        include_str!("../../configs/keccak-onlychi-r6.json"),
    ),
    (
        "keccak200-perm-mask16",
        include_str!("../../configs/keccak200-perm-mask16.json"),
    ),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.0)
}

/// The shipped config called `name`, with or without a `.json` suffix.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    let (_, json) = PRESETS
        .iter()
        .find(|p| p.0 == name)
        .ok_or_else(|| Error::Config(format!("no preset named `{name}`")))?;
    ExperimentConfig::from_json(json)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_and_round_trips() {
        for name in names() {
            let cfg = preset(name).unwrap();
            assert_eq!(cfg.name, name);
            assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        }
        assert_eq!(names().count(), 18);
        assert!(preset("nope").is_err());
    }
}
