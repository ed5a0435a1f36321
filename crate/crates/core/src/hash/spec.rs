use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{Algebra, OpVariantSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "md5")]
    Md5,
    #[serde(rename = "sha1")]
    Sha1,
    #[serde(rename = "sha2_256")]
    Sha256,
    /// Keccak sponge over the 1600-bit state.
    #[serde(rename = "keccak1600")]
    Keccak1600,
    /// Bare Keccak-f[200] permutation: message and hash are the 200-bit state.
    #[serde(rename = "keccak200_perm")]
    Keccak200Perm,
    /// One SHA1 step on a 160-bit state and a 32-bit word, no IV feed-forward.
    #[serde(rename = "sha1_round_state")]
    Sha1RoundState,
    /// Sum of the two 32-bit halves of a 64-bit message.
    #[serde(rename = "add_toy")]
    AddToy,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Md5,
        Algorithm::Sha1,
        Algorithm::Sha256,
        Algorithm::Keccak1600,
        Algorithm::Keccak200Perm,
        Algorithm::Sha1RoundState,
        Algorithm::AddToy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Md5 => "md5",
            Algorithm::Sha1 => "sha1",
            Algorithm::Sha256 => "sha2_256",
            Algorithm::Keccak1600 => "keccak1600",
            Algorithm::Keccak200Perm => "keccak200_perm",
            Algorithm::Sha1RoundState => "sha1_round_state",
            Algorithm::AddToy => "add_toy",
        }
    }

    /// Full round count, which is also the maximum.
    pub fn default_rounds(self) -> usize {
        match self {
            Algorithm::Md5 | Algorithm::Sha256 => 64,
            Algorithm::Sha1 => 80,
            Algorithm::Keccak1600 => 24,
            Algorithm::Keccak200Perm => 18,
            Algorithm::Sha1RoundState | Algorithm::AddToy => 1,
        }
    }

    /// Natural digest length before truncation.
    pub fn natural_out_bits(self) -> usize {
        match self {
            Algorithm::Md5 => 128,
            Algorithm::Sha1 | Algorithm::Sha1RoundState => 160,
            Algorithm::Sha256 | Algorithm::Keccak1600 => 256,
            Algorithm::Keccak200Perm => 200,
            Algorithm::AddToy => 32,
        }
    }

    /// Message length required by the state-transform targets.
    pub fn fixed_message_bits(self) -> Option<usize> {
        match self {
            Algorithm::Keccak200Perm => Some(200),
            Algorithm::Sha1RoundState => Some(192),
            Algorithm::AddToy => Some(64),
            _ => None,
        }
    }

    pub fn is_keccak(self) -> bool {
        matches!(self, Algorithm::Keccak1600 | Algorithm::Keccak200Perm)
    }

    /// Uses ADD and the K/IV constant tables.
    pub fn is_md_family(self) -> bool {
        matches!(
            self,
            Algorithm::Md5 | Algorithm::Sha1 | Algorithm::Sha256 | Algorithm::Sha1RoundState
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase().replace('-', "_");
        match lower.as_str() {
            "sha2" | "sha256" | "sha_256" | "sha2_256" => Ok(Algorithm::Sha256),
            "keccak" => Ok(Algorithm::Keccak1600),
            "keccak200" => Ok(Algorithm::Keccak200Perm),
            _ => Algorithm::ALL
                .into_iter()
                .find(|a| a.name() == lower)
                .ok_or_else(|| Error::Parse(format!("unknown algorithm `{s}`"))),
        }
    }
}

/// One step mapping of a Keccak round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Theta,
    Rho,
    Pi,
    Chi,
    Iota,
}

impl Step {
    pub const ALL: [Step; 5] = [Step::Theta, Step::Rho, Step::Pi, Step::Chi, Step::Iota];

    fn bit(self) -> u8 {
        1 << self as u8
    }

    fn name(self) -> &'static str {
        match self {
            Step::Theta => "theta",
            Step::Rho => "rho",
            Step::Pi => "pi",
            Step::Chi => "chi",
            Step::Iota => "iota",
        }
    }
}

/// Subset of the Keccak step mappings applied in each round.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Step>", into = "Vec<Step>")]
pub struct StepMask(u8);

impl StepMask {
    pub const ALL: StepMask = StepMask(0b1_1111);
    pub const NONE: StepMask = StepMask(0);

    pub fn contains(self, step: Step) -> bool {
        self.0 & step.bit() != 0
    }

    pub fn with(self, step: Step) -> Self {
        StepMask(self.0 | step.bit())
    }

    pub fn without(self, step: Step) -> Self {
        StepMask(self.0 & !step.bit())
    }

    pub fn steps(self) -> Vec<Step> {
        Step::ALL
            .into_iter()
            .filter(|&s| self.contains(s))
            .collect()
    }

    /// True when only move-bits steps are present.
    pub fn is_permutation_only(self) -> bool {
        self.0 & !(Step::Rho.bit() | Step::Pi.bit()) == 0
    }
}

impl Default for StepMask {
    fn default() -> Self {
        StepMask::ALL
    }
}

impl From<Vec<Step>> for StepMask {
    fn from(steps: Vec<Step>) -> Self {
        steps.into_iter().fold(StepMask::NONE, StepMask::with)
    }
}

impl From<StepMask> for Vec<Step> {
    fn from(mask: StepMask) -> Self {
        mask.steps()
    }
}

impl fmt::Debug for StepMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StepMask({self})")
    }
}

impl fmt::Display for StepMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == StepMask::NONE {
            return f.write_str("none");
        }
        let names: Vec<&str> = self.steps().into_iter().map(Step::name).collect();
        f.write_str(&names.join(","))
    }
}

/// `all`, `none`, a comma list such as `rho,pi`, or `all` followed by
/// removals such as `all-theta`.
impl FromStr for StepMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let mut parts = s.split('-');
        let head = parts.next().unwrap_or_default();
        let mut mask = match head {
            "all" => StepMask::ALL,
            "none" | "" => StepMask::NONE,
            list => list
                .split(',')
                .map(str::trim)
                .try_fold(StepMask::NONE, |m, name| {
                    step_by_name(name).map(|st| m.with(st))
                })?,
        };
        for removed in parts {
            mask = mask.without(step_by_name(removed.trim())?);
        }
        Ok(mask)
    }
}

fn step_by_name(name: &str) -> Result<Step> {
    Step::ALL
        .into_iter()
        .find(|s| s.name() == name)
        .ok_or_else(|| Error::Parse(format!("unknown Keccak step `{name}`")))
}

/// Replacement tables for the round constants `K` and the initial values `H`.
///
/// A table of length 1 is broadcast to every entry. SHA1 also accepts 4
/// stage constants or 80 per-step constants.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsOverride {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iv: Option<Vec<u32>>,
}

/// The regular bit pattern used by the `regular` preset.
pub const REGULAR_CONSTANT: u32 = 0x1313_1313;

impl ConstantsOverride {
    /// `zero` or `regular` (every K and IV word set to 0x13131313).
    pub fn preset(name: &str) -> Result<Self> {
        let word = match name {
            "zero" => 0,
            "regular" => REGULAR_CONSTANT,
            other => return Err(Error::Parse(format!("unknown constants preset `{other}`"))),
        };
        Ok(Self {
            k: Some(vec![word]),
            iv: Some(vec![word]),
        })
    }
}

fn expand(table: &Option<Vec<u32>>, default: &[u32], what: &str) -> Result<Vec<u32>> {
    match table {
        None => Ok(default.to_vec()),
        Some(t) if t.len() == 1 => Ok(vec![t[0]; default.len()]),
        Some(t) if t.len() == default.len() => Ok(t.clone()),
        Some(t) => Err(Error::Config(format!(
            "{what} override has {} entries, expected 1 or {}",
            t.len(),
            default.len()
        ))),
    }
}

/// Everything that determines a hash function, exact or fuzzy.
///
/// Optional fields fall back to the algorithm's standard values, so
/// `{"algorithm": "sha1"}` is the full SHA1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HashSpec {
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_bits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_mask: Option<StepMask>,
    /// Replace every ADD, including the IV feed-forward, by XOR.
    #[serde(default)]
    pub add_as_xor: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants_override: Option<ConstantsOverride>,
    #[serde(default)]
    pub algebra: Algebra,
    #[serde(default, skip_serializing_if = "OpVariantSet::is_default")]
    pub variants: OpVariantSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_byte: Option<u8>,
    /// Add the chaining value to the compressed state after the (possibly
    /// reduced) round loop.
    #[serde(default = "yes")]
    pub feed_forward: bool,
    /// Use XOR instead of OR in the choose functions (MD5 F and G, SHA1 and
    /// SHA2 Ch). Binary results are unchanged.
    #[serde(default)]
    pub choose_xor: bool,
}

fn yes() -> bool {
    true
}

pub const KECCAK_DOMAIN: u8 = 0x01;
pub const SHA3_DOMAIN: u8 = 0x06;

impl HashSpec {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            rounds: None,
            out_bits: None,
            rate: None,
            capacity: None,
            step_mask: None,
            add_as_xor: false,
            constants_override: None,
            algebra: Algebra::Unit,
            variants: OpVariantSet::default(),
            domain_byte: None,
            feed_forward: true,
            choose_xor: false,
        }
    }

    /// Keccak-1600 with hash length `h`, capacity `2h` and the original
    /// Keccak domain byte 0x01.
    pub fn keccak(h: usize) -> Self {
        Self::new(Algorithm::Keccak1600).with_out_bits(h)
    }

    /// SHA3-`h`: Keccak-1600 with capacity `2h` and domain byte 0x06.
    pub fn sha3(h: usize) -> Self {
        let mut spec = Self::keccak(h);
        spec.domain_byte = Some(SHA3_DOMAIN);
        spec
    }

    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.rounds = Some(rounds);
        self
    }

    pub fn with_out_bits(mut self, bits: usize) -> Self {
        self.out_bits = Some(bits);
        self
    }

    pub fn with_algebra(mut self, algebra: Algebra) -> Self {
        self.algebra = algebra;
        self
    }

    pub fn with_steps(mut self, steps: StepMask) -> Self {
        self.step_mask = Some(steps);
        self
    }

    pub fn rounds(&self) -> usize {
        self.rounds.unwrap_or(self.algorithm.default_rounds())
    }

    pub fn out_bits(&self) -> usize {
        self.out_bits.unwrap_or(self.algorithm.natural_out_bits())
    }

    pub fn state_bits(&self) -> usize {
        match self.algorithm {
            Algorithm::Keccak200Perm => 200,
            _ => 1600,
        }
    }

    pub fn capacity(&self) -> usize {
        match (self.capacity, self.rate) {
            (Some(c), _) => c,
            (None, Some(r)) => self.state_bits().saturating_sub(r),
            (None, None) => 2 * self.out_bits(),
        }
    }

    pub fn rate(&self) -> usize {
        self.rate
            .unwrap_or_else(|| self.state_bits().saturating_sub(self.capacity()))
    }

    pub fn steps(&self) -> StepMask {
        self.step_mask.unwrap_or_default()
    }

    pub fn domain_byte(&self) -> u8 {
        self.domain_byte.unwrap_or(KECCAK_DOMAIN)
    }

    /// The K table after overrides: 64 entries for MD5 and SHA2, 80 for SHA1.
    pub fn k_table(&self) -> Result<Vec<u32>> {
        use super::constants::*;
        let over = self.constants_override.clone().unwrap_or_default();
        match self.algorithm {
            Algorithm::Md5 => expand(&over.k, &MD5_T, "K"),
            Algorithm::Sha256 => expand(&over.k, &SHA256_K, "K"),
            Algorithm::Sha1 | Algorithm::Sha1RoundState => {
                let per_step: Vec<u32> = (0..80).map(|i| SHA1_K[i / 20]).collect();
                match &over.k {
                    Some(t) if t.len() == 4 => Ok((0..80).map(|i| t[i / 20]).collect()),
                    k => expand(k, &per_step, "K"),
                }
            }
            _ => Ok(Vec::new()),
        }
    }

    /// The initial chaining value after overrides.
    pub fn iv_table(&self) -> Result<Vec<u32>> {
        use super::constants::*;
        let over = self.constants_override.clone().unwrap_or_default();
        match self.algorithm {
            Algorithm::Md5 => expand(&over.iv, &MD5_IV, "IV"),
            Algorithm::Sha1 => expand(&over.iv, &SHA1_IV, "IV"),
            Algorithm::Sha256 => expand(&over.iv, &SHA256_IV, "IV"),
            _ => Ok(Vec::new()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let alg = self.algorithm;
        let bad = |msg: String| Err(Error::Config(format!("{alg}: {msg}")));
        let rounds = self.rounds();
        if rounds == 0 || rounds > alg.default_rounds() {
            return bad(format!(
                "rounds must be in 1..={}, got {rounds}",
                alg.default_rounds()
            ));
        }
        let out = self.out_bits();
        if out == 0 {
            return bad("out_bits must be positive".into());
        }
        if alg == Algorithm::Keccak1600 {
            let (rate, cap) = (self.rate(), self.capacity());
            if rate + cap != 1600 {
                return bad(format!("rate {rate} + capacity {cap} must equal 1600"));
            }
            if rate == 0 || rate % 8 != 0 {
                return bad(format!("rate must be a positive multiple of 8, got {rate}"));
            }
            if out > rate {
                return bad(format!("out_bits {out} exceeds the rate {rate}"));
            }
        } else {
            if out > alg.natural_out_bits() {
                return bad(format!(
                    "out_bits {out} exceeds the natural length {}",
                    alg.natural_out_bits()
                ));
            }
            if self.rate.is_some() || self.capacity.is_some() || self.domain_byte.is_some() {
                return bad("rate, capacity and domain_byte apply to keccak1600 only".into());
            }
        }
        if self.domain_byte == Some(0) {
            return bad("domain_byte must have a set bit".into());
        }
        if self.step_mask.is_some() && !alg.is_keccak() {
            return bad("step_mask applies to Keccak only".into());
        }
        if self.constants_override.is_some() && !alg.is_md_family() {
            return bad("constants_override applies to MD5, SHA1 and SHA2 only".into());
        }
        self.k_table()?;
        self.iv_table()?;
        self.variants.validate()?;
        if self.algebra == Algebra::Circular && !self.variants.is_default() {
            return bad("op variants apply to the unit algebra only".into());
        }
        Ok(())
    }

    /// Canonical JSON, used as a cache key and in report echoes.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}

/// Hash-bit indices that contribute to the loss and the miss count.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MaskRepr", into = "Vec<usize>")]
pub struct MaskSpec {
    indices: Vec<usize>,
}

impl MaskSpec {
    /// Requires a non-empty, strictly increasing list.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Config("mask must not be empty".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "mask indices must be strictly increasing".into(),
            ));
        }
        Ok(Self { indices })
    }

    pub fn full(k: usize) -> Self {
        Self {
            indices: (0..k).collect(),
        }
    }

    /// `start..end`, end exclusive.
    pub fn range(start: usize, end: usize) -> Result<Self> {
        Self::new((start..end).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn validate(&self, out_bits: usize) -> Result<()> {
        match self.indices.last() {
            Some(&last) if last >= out_bits => Err(Error::Config(format!(
                "mask index {last} out of range for {out_bits} hash bits"
            ))),
            _ => Ok(()),
        }
    }
}

/// Masks read from JSON as an index list or as a range string like `"0-7,17"`.
#[derive(Deserialize)]
#[serde(untagged)]
enum MaskRepr {
    List(Vec<usize>),
    Text(String),
}

impl TryFrom<MaskRepr> for MaskSpec {
    type Error = Error;

    fn try_from(r: MaskRepr) -> Result<Self> {
        match r {
            MaskRepr::List(v) => Self::new(v),
            MaskRepr::Text(s) => s.parse(),
        }
    }
}

impl TryFrom<Vec<usize>> for MaskSpec {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MaskSpec> for Vec<usize> {
    fn from(m: MaskSpec) -> Self {
        m.indices
    }
}

/// Comma-separated indices and inclusive ranges, e.g. `0-7,17,28`.
/// Unsorted input is sorted; duplicates are rejected.
impl FromStr for MaskSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |p: &str| Error::Parse(format!("bad mask item `{p}`"));
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.split_once('-') {
                Some((a, b)) => {
                    let a: usize = a.trim().parse().map_err(|_| bad(part))?;
                    let b: usize = b.trim().parse().map_err(|_| bad(part))?;
                    if a > b {
                        return Err(bad(part));
                    }
                    out.extend(a..=b);
                }
                None => out.push(part.parse().map_err(|_| bad(part))?),
            }
        }
        out.sort_unstable();
        Self::new(out)
    }
}

impl fmt::Display for MaskSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut i = 0;
        while i < self.indices.len() {
            let mut j = i;
            while j + 1 < self.indices.len() && self.indices[j + 1] == self.indices[j] + 1 {
                j += 1;
            }
            if !first {
                f.write_str(",")?;
            }
            first = false;
            if j > i {
                write!(f, "{}-{}", self.indices[i], self.indices[j])?;
            } else {
                write!(f, "{}", self.indices[i])?;
            }
            i = j + 1;
        }
        Ok(())
    }
}
