//! Fuzzy bits, the two fuzbit algebras and the ops defined on them.
//!
//! A unit fuzbit lives in `[0, 1]`; a circular fuzbit lives in `(-1, 1]`
//! and is read as a scaled angle on the unit circle. Binbits `0` and `1`
//! belong to both domains and every op returns the classical result on them.

mod gates;
mod moves;
mod ops;
mod variants;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use gates::Gates;
pub use moves::{move_bits, BitMove};
pub use ops::{
    adder_digit_carry, angular_distance, circ_add, circ_op, circ_to_unit, fuz_add, fuz_and,
    fuz_not, fuz_or, fuz_xor, push_transform, wrap2, CircOp,
};
pub use variants::{AdderVariant, AndVariant, NotVariant, OpVariantSet, OrVariant, XorVariant};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algebra {
    /// Fuzbits in `[0, 1]`.
    #[default]
    Unit,
    /// Fuzbits in `(-1, 1]`.
    Circular,
}

impl Algebra {
    pub fn contains(self, v: f64) -> bool {
        match self {
            Algebra::Unit => (0.0..=1.0).contains(&v),
            Algebra::Circular => v > -1.0 && v <= 1.0,
        }
    }

    pub(crate) fn check<T: Scalar>(self, v: T) -> Result<T> {
        let x = v.to_f64_lossy();
        if self.contains(x) {
            Ok(v)
        } else {
            Err(Error::Domain {
                value: x,
                algebra: self,
            })
        }
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algebra::Unit => "unit",
            Algebra::Circular => "circular",
        })
    }
}

impl std::str::FromStr for Algebra {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(Algebra::Unit),
            "circular" | "circ" => Ok(Algebra::Circular),
            other => Err(Error::Parse(format!("unknown algebra `{other}`"))),
        }
    }
}

/// A vector of fuzbits, all in the domain of one algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct FuzVector<T> {
    values: Vec<T>,
    algebra: Algebra,
}

impl<T: Scalar> FuzVector<T> {
    pub fn new(values: Vec<T>, algebra: Algebra) -> Result<Self> {
        for &v in &values {
            algebra.check(v)?;
        }
        Ok(Self { values, algebra })
    }

    /// Embeds binbits; `0 -> 0` and `1 -> 1` in both algebras.
    pub fn from_bits(bits: &BitVector, algebra: Algebra) -> Self {
        Self {
            values: bits
                .iter()
                .map(|b| if b { T::one() } else { T::zero() })
                .collect(),
            algebra,
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn algebra(&self) -> Algebra {
        self.algebra
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Rounds to binbits: `1` iff the (unit-mapped) value is at least `1/2`.
    pub fn round_to_bin(&self) -> BitVector {
        let half = T::of(0.5);
        self.values
            .iter()
            .map(|&v| match self.algebra {
                Algebra::Unit => v >= half,
                Algebra::Circular => v.abs() >= half,
            })
            .collect()
    }

    /// Maps circular fuzbits to unit fuzbits through `a -> |a|`.
    pub fn to_unit(&self) -> FuzVector<T> {
        match self.algebra {
            Algebra::Unit => self.clone(),
            Algebra::Circular => FuzVector {
                values: self.values.iter().map(|v| v.abs()).collect(),
                algebra: Algebra::Unit,
            },
        }
    }

    /// Relocates values without transforming them; vacated positions get binbit 0.
    pub fn move_bits(&self, mv: &BitMove) -> Result<FuzVector<T>> {
        Ok(FuzVector {
            values: move_bits(&self.values, mv, T::zero())?,
            algebra: self.algebra,
        })
    }
}
