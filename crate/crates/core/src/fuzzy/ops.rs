//! Direct scalar evaluation of the fuzzy ops.
//!
//! These are the reference formulas; [`super::Gates`] emits the same
//! formulas onto an autodiff tape.

use std::f64::consts::PI;

use super::variants::{AdderVariant, AndVariant, NotVariant, OpVariantSet, OrVariant, XorVariant};
use super::{Algebra, FuzVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CircOp {
    Not,
    And,
    Or,
    Xor,
}

pub(crate) fn not_unit<T: Scalar>(a: T, v: &OpVariantSet) -> T {
    match v.not_variant {
        NotVariant::Std => T::one() - a,
        NotVariant::Square => (T::one() - a) * (T::one() - a),
        NotVariant::Cos => (T::of(PI / 2.0) * a).cos(),
    }
}

pub(crate) fn and_unit<T: Scalar>(a: T, b: T, v: &OpVariantSet) -> T {
    match v.and_variant {
        AndVariant::Product => a * b,
        AndVariant::Min => a.min(b),
        AndVariant::Power => (a * b).powf(T::of(v.p)),
        AndVariant::Asym => a * a * b,
    }
}

pub(crate) fn or_unit<T: Scalar>(a: T, b: T, v: &OpVariantSet) -> T {
    match v.or_variant {
        OrVariant::ProbSum => a + b - a * b,
        OrVariant::Max => a.max(b),
        OrVariant::SubMin => a + b - a.min(b),
        OrVariant::CapSum => (a + b).min(T::one()),
    }
}

/// XOR before the optional push transform.
pub(crate) fn xor_unit_raw<T: Scalar>(a: T, b: T, v: &OpVariantSet) -> T {
    match v.xor_variant {
        XorVariant::Bilinear => a + b - (a * b + a * b),
        XorVariant::NonAssoc => {
            let one = T::one();
            a * (one - b) + b * (one - a) - a * b * (one - a) * (one - b)
        }
        XorVariant::AbsPow => (a - b).abs().powf(T::of(v.p)),
        XorVariant::Tent => (a + b).min(T::of(2.0) - a - b),
        XorVariant::Sine => (T::of(PI / 2.0) * (a + b)).sin(),
    }
}

pub(crate) fn xor_unit<T: Scalar>(a: T, b: T, v: &OpVariantSet) -> T {
    let r = xor_unit_raw(a, b, v);
    if v.push_after_xor {
        push_raw(r)
    } else {
        r
    }
}

pub(crate) fn push_raw<T: Scalar>(r: T) -> T {
    r * r * (T::of(3.0) - (r + r))
}

/// Digit and carry of one full-adder position in the unit algebra.
pub fn adder_digit_carry<T: Scalar>(a: T, b: T, c: T, v: &OpVariantSet) -> (T, T) {
    let half = T::of(0.5);
    let (d, carry) = match v.adder_variant {
        AdderVariant::IdentityCarry => {
            let d = xor_unit_raw(xor_unit_raw(a, b, v), c, v);
            (d, (a + b + c - d) * half)
        }
        AdderVariant::FullFuzzy => {
            let ab = xor_unit_raw(a, b, v);
            let d = xor_unit_raw(ab, c, v);
            (d, or_unit(and_unit(a, b, v), and_unit(ab, c, v), v))
        }
        AdderVariant::Cosine => {
            let s = a + b + c;
            let d = (T::one() - (T::of(PI) * s).cos()) * half;
            (d, (s - d) * half)
        }
        AdderVariant::Clamp => {
            let s = a + b + c;
            let carry = (s - T::one()).max(T::zero()).min(T::one());
            (s - (carry + carry), carry)
        }
    };
    if v.push_after_add {
        (push_raw(d), carry)
    } else {
        (d, carry)
    }
}

/// `x` wrapped into `(-1, 1]` by multiples of 2.
pub fn wrap2<T: Scalar>(x: T) -> T {
    let two = T::of(2.0);
    let mut r = x - two * (x / two).round();
    if r <= -T::one() {
        r += two;
    } else if r > T::one() {
        r -= two;
    }
    r
}

pub(crate) fn circ_raw<T: Scalar>(kind: CircOp, a: T, b: T) -> T {
    match kind {
        CircOp::Not => wrap2(a + T::one()),
        CircOp::And => a * b,
        CircOp::Or => circ_raw(
            CircOp::Not,
            circ_raw(CircOp::Not, a, b) * circ_raw(CircOp::Not, b, a),
            b,
        ),
        CircOp::Xor => wrap2(a + b),
    }
}

pub(crate) fn circ_digit_carry<T: Scalar>(a: T, b: T, c: T) -> (T, T) {
    let ab = circ_raw(CircOp::Xor, a, b);
    let d = circ_raw(CircOp::Xor, ab, c);
    let carry = circ_raw(CircOp::Xor, a * b, ab * c);
    (d, carry)
}

fn unit<T: Scalar>(a: T) -> Result<T> {
    Algebra::Unit.check(a)
}

pub fn fuz_not<T: Scalar>(a: T, v: &OpVariantSet) -> Result<T> {
    Ok(not_unit(unit(a)?, v))
}

pub fn fuz_and<T: Scalar>(a: T, b: T, v: &OpVariantSet) -> Result<T> {
    Ok(and_unit(unit(a)?, unit(b)?, v))
}

pub fn fuz_or<T: Scalar>(a: T, b: T, v: &OpVariantSet) -> Result<T> {
    Ok(or_unit(unit(a)?, unit(b)?, v))
}

/// Unit XOR, including the push transform when `push_after_xor` is set.
pub fn fuz_xor<T: Scalar>(a: T, b: T, v: &OpVariantSet) -> Result<T> {
    Ok(xor_unit(unit(a)?, unit(b)?, v))
}

/// `t(r) = 3r^2 - 2r^3`; fixes 0, 1/2 and 1.
pub fn push_transform<T: Scalar>(r: T) -> Result<T> {
    Ok(push_raw(unit(r)?))
}

/// Circular op; `b` is ignored for [`CircOp::Not`] and required otherwise.
pub fn circ_op<T: Scalar>(kind: CircOp, a: T, b: Option<T>) -> Result<T> {
    let a = Algebra::Circular.check(a)?;
    let b = match (kind, b) {
        (CircOp::Not, _) => T::zero(),
        (_, Some(b)) => Algebra::Circular.check(b)?,
        (_, None) => return Err(Error::Usage(format!("{kind:?} needs two operands"))),
    };
    Ok(circ_raw(kind, a, b))
}

pub fn circ_to_unit<T: Scalar>(a: T) -> Result<T> {
    Ok(Algebra::Circular.check(a)?.abs())
}

/// Angular distance between two circular fuzbits.
pub fn angular_distance<T: Scalar>(a: T, b: T) -> T {
    let two = T::of(2.0);
    (a - b)
        .abs()
        .min((a - b + two).abs())
        .min((b - a + two).abs())
}

/// Circular ripple-carry addition of two little-endian words, final carry dropped.
pub fn circ_add<T: Scalar>(a: &[T], b: &[T]) -> Result<Vec<T>> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "ADD operands have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mut carry = T::zero();
    let mut out = Vec::with_capacity(a.len());
    for (&x, &y) in a.iter().zip(b) {
        let (d, c) = circ_digit_carry(
            Algebra::Circular.check(x)?,
            Algebra::Circular.check(y)?,
            carry,
        );
        out.push(d);
        carry = c;
    }
    Ok(out)
}

/// Ripple-carry addition modulo `2^n` of little-endian fuzbit words.
pub fn fuz_add<T: Scalar>(
    a: &FuzVector<T>,
    b: &FuzVector<T>,
    v: &OpVariantSet,
) -> Result<FuzVector<T>> {
    if a.algebra() != b.algebra() {
        return Err(Error::Usage("ADD operands use different algebras".into()));
    }
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "ADD operands have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let values = match a.algebra() {
        Algebra::Circular => circ_add(a.values(), b.values())?,
        Algebra::Unit => {
            let mut carry = T::zero();
            a.values()
                .iter()
                .zip(b.values())
                .map(|(&x, &y)| {
                    let (d, c) = adder_digit_carry(x, y, carry, v);
                    carry = c;
                    d
                })
                .collect()
        }
    };
    FuzVector::new(values, a.algebra())
}
