use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotVariant {
    /// `1 - a`
    #[default]
    Std,
    /// `(1 - a)^2`
    Square,
    /// `cos(pi a / 2)`
    Cos,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AndVariant {
    /// Product t-norm `ab`.
    #[default]
    Product,
    /// `min(a, b)`
    Min,
    /// `(ab)^p`
    Power,
    /// `a^2 b`, not commutative.
    Asym,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrVariant {
    /// `a + b - ab`
    #[default]
    #[serde(alias = "probsum")]
    ProbSum,
    /// `max(a, b)`
    Max,
    /// `a + b - min(a, b)`
    #[serde(alias = "submin")]
    SubMin,
    /// `min(a + b, 1)`
    #[serde(alias = "capsum")]
    CapSum,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XorVariant {
    /// `a(1 - b) + (1 - a)b`, associative.
    #[default]
    Bilinear,
    /// `a(1 - b) + b(1 - a) - ab(1 - a)(1 - b)`
    #[serde(alias = "nonassoc")]
    NonAssoc,
    /// `|a - b|^p`
    #[serde(alias = "abspow")]
    AbsPow,
    /// `min(a + b, 2 - a - b)`
    Tent,
    /// `sin(pi (a + b) / 2)`
    Sine,
}

/// Digit/carry pair used by the ripple-carry ADD.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdderVariant {
    /// `D = (a XOR b) XOR c`, `C = (a + b + c - D) / 2`
    #[default]
    #[serde(alias = "identity")]
    IdentityCarry,
    /// `D = (a XOR b) XOR c`, `C = (a AND b) OR ((a XOR b) AND c)`
    #[serde(alias = "fullfuzzy")]
    FullFuzzy,
    /// `D = (1 - cos(pi (a + b + c))) / 2`, `C = (a + b + c - D) / 2`
    Cosine,
    /// `C = min(max(a + b + c - 1, 0), 1)`, `D = a + b + c - 2C`
    Clamp,
}

/// Selection of the unit-algebra op formulas.
///
/// The default reproduces the product/probabilistic-sum/bilinear family with
/// the identity-carry adder and no push transform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpVariantSet {
    pub not_variant: NotVariant,
    pub and_variant: AndVariant,
    pub or_variant: OrVariant,
    pub xor_variant: XorVariant,
    pub adder_variant: AdderVariant,
    /// Apply `t(r) = 3r^2 - 2r^3` to every standalone XOR result.
    pub push_after_xor: bool,
    /// Apply the push transform to every ADD digit.
    pub push_after_add: bool,
    /// Exponent shared by `AndVariant::Power` and `XorVariant::AbsPow`.
    pub p: f64,
}

impl Default for OpVariantSet {
    fn default() -> Self {
        Self {
            not_variant: NotVariant::Std,
            and_variant: AndVariant::Product,
            or_variant: OrVariant::ProbSum,
            xor_variant: XorVariant::Bilinear,
            adder_variant: AdderVariant::IdentityCarry,
            push_after_xor: false,
            push_after_add: false,
            p: 2.0,
        }
    }
}

impl OpVariantSet {
    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 0.0) {
            return Err(Error::Config(format!(
                "variant exponent p must be positive, got {}",
                self.p
            )));
        }
        Ok(())
    }

    pub fn is_default(&self) -> bool {
        *self == Self::default()
    }
}

/// Parses `key=value` pairs separated by commas, e.g.
/// `and=min,xor=abspow,p=3,push`. A bare `push` enables `push_after_xor`.
impl FromStr for OpVariantSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut set = OpVariantSet::default();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (key, value) = item.split_once('=').unwrap_or((item, ""));
            let bad = || Error::Parse(format!("unknown variant setting `{item}`"));
            match (key, value) {
                ("not", v) => set.not_variant = parse_name(v).ok_or_else(bad)?,
                ("and", v) => set.and_variant = parse_name(v).ok_or_else(bad)?,
                ("or", v) => set.or_variant = parse_name(v).ok_or_else(bad)?,
                ("xor", v) => set.xor_variant = parse_name(v).ok_or_else(bad)?,
                ("adder" | "add", v) => set.adder_variant = parse_name(v).ok_or_else(bad)?,
                ("push" | "push_xor", "") => set.push_after_xor = true,
                ("push_add", "") => set.push_after_add = true,
                ("p", v) => set.p = v.parse().map_err(|_| bad())?,
                _ => return Err(bad()),
            }
        }
        set.validate()?;
        Ok(set)
    }
}

fn parse_name<T: for<'de> Deserialize<'de>>(name: &str) -> Option<T> {
    serde_json::from_value(serde_json::Value::String(name.to_ascii_lowercase())).ok()
}

impl fmt::Display for OpVariantSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |v: serde_json::Value| v.as_str().unwrap_or_default().to_owned();
        write!(
            f,
            "not={},and={},or={},xor={},adder={},p={}",
            name(serde_json::to_value(self.not_variant).unwrap_or_default()),
            name(serde_json::to_value(self.and_variant).unwrap_or_default()),
            name(serde_json::to_value(self.or_variant).unwrap_or_default()),
            name(serde_json::to_value(self.xor_variant).unwrap_or_default()),
            name(serde_json::to_value(self.adder_variant).unwrap_or_default()),
            self.p
        )?;
        if self.push_after_xor {
            f.write_str(",push")?;
        }
        if self.push_after_add {
            f.write_str(",push_add")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_settings() {
        let v: OpVariantSet = "and=min, xor=abspow, p=3, push".parse().unwrap();
        assert_eq!(v.and_variant, AndVariant::Min);
        assert_eq!(v.xor_variant, XorVariant::AbsPow);
        assert_eq!(v.p, 3.0);
        assert!(v.push_after_xor);
        assert!(!v.push_after_add);
        assert!("".parse::<OpVariantSet>().unwrap().is_default());
    }

    #[test]
    fn rejects_bad_settings() {
        assert!("xor=mod2".parse::<OpVariantSet>().is_err());
        assert!("p=0".parse::<OpVariantSet>().is_err());
        assert!("p=-1".parse::<OpVariantSet>().is_err());
        assert!("frobnicate".parse::<OpVariantSet>().is_err());
    }

    #[test]
    fn display_parses_back() {
        let v: OpVariantSet = "not=cos,or=capsum,adder=clamp,push_add".parse().unwrap();
        assert_eq!(v.to_string().parse::<OpVariantSet>().unwrap(), v);
    }
}
