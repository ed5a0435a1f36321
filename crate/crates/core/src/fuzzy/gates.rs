//! Fuzzy gates recorded onto an autodiff tape.
//!
//! Every gate performs exactly the floating-point operations of its scalar
//! counterpart in `ops`, in the same order, so a compiled circuit and the
//! scalar reference agree bit for bit.

use std::f64::consts::PI;

use super::variants::{AdderVariant, AndVariant, NotVariant, OpVariantSet, OrVariant, XorVariant};
use super::Algebra;
use crate::autodiff::{TapeBuilder, Var};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Gates {
    pub algebra: Algebra,
    /// Only consulted in the unit algebra.
    pub variants: OpVariantSet,
}

impl Gates {
    pub fn new(algebra: Algebra, variants: OpVariantSet) -> Self {
        Self { algebra, variants }
    }

    /// Constant node for a binbit; 0 and 1 are binbits in both algebras.
    pub fn bit<T: Scalar>(&self, b: &mut TapeBuilder<T>, bit: bool) -> Var {
        if bit {
            b.one()
        } else {
            b.zero()
        }
    }

    pub fn word_const<T: Scalar>(
        &self,
        b: &mut TapeBuilder<T>,
        value: u64,
        width: usize,
    ) -> Vec<Var> {
        (0..width)
            .map(|i| self.bit(b, (value >> i) & 1 == 1))
            .collect()
    }

    pub fn not<T: Scalar>(&self, b: &mut TapeBuilder<T>, a: Var) -> Var {
        match self.algebra {
            Algebra::Circular => {
                let s = b.add_const(a, 1.0);
                b.wrap2(s)
            }
            Algebra::Unit => match self.variants.not_variant {
                NotVariant::Std => b.rsub_const(1.0, a),
                NotVariant::Square => {
                    let m = b.rsub_const(1.0, a);
                    b.mul(m, m)
                }
                NotVariant::Cos => {
                    let s = b.scale(a, PI / 2.0);
                    b.cos(s)
                }
            },
        }
    }

    pub fn and<T: Scalar>(&self, b: &mut TapeBuilder<T>, x: Var, y: Var) -> Var {
        if self.algebra == Algebra::Circular {
            return b.mul(x, y);
        }
        match self.variants.and_variant {
            AndVariant::Product => b.mul(x, y),
            AndVariant::Min => b.min(x, y),
            AndVariant::Power => {
                let m = b.mul(x, y);
                b.pow(m, self.variants.p)
            }
            AndVariant::Asym => {
                let xx = b.mul(x, x);
                b.mul(xx, y)
            }
        }
    }

    pub fn or<T: Scalar>(&self, b: &mut TapeBuilder<T>, x: Var, y: Var) -> Var {
        if self.algebra == Algebra::Circular {
            let nx = self.not(b, x);
            let ny = self.not(b, y);
            let m = b.mul(nx, ny);
            return self.not(b, m);
        }
        match self.variants.or_variant {
            OrVariant::ProbSum => {
                let s = b.add(x, y);
                let m = b.mul(x, y);
                b.sub(s, m)
            }
            OrVariant::Max => b.max(x, y),
            OrVariant::SubMin => {
                let s = b.add(x, y);
                let m = b.min(x, y);
                b.sub(s, m)
            }
            OrVariant::CapSum => {
                let s = b.add(x, y);
                let one = b.one();
                b.min(s, one)
            }
        }
    }

    /// XOR without the push transform.
    pub fn xor_raw<T: Scalar>(&self, b: &mut TapeBuilder<T>, x: Var, y: Var) -> Var {
        if self.algebra == Algebra::Circular {
            let s = b.add(x, y);
            return b.wrap2(s);
        }
        match self.variants.xor_variant {
            XorVariant::Bilinear => {
                let s = b.add(x, y);
                let m = b.mul(x, y);
                let mm = b.add(m, m);
                b.sub(s, mm)
            }
            XorVariant::NonAssoc => {
                let ny = b.rsub_const(1.0, y);
                let nx = b.rsub_const(1.0, x);
                let l = b.mul(x, ny);
                let r = b.mul(y, nx);
                let lr = b.add(l, r);
                let m = b.mul(x, y);
                let m = b.mul(m, nx);
                let m = b.mul(m, ny);
                b.sub(lr, m)
            }
            XorVariant::AbsPow => {
                let d = b.sub(x, y);
                let a = b.abs(d);
                b.pow(a, self.variants.p)
            }
            XorVariant::Tent => {
                let s = b.add(x, y);
                let two = b.constant(T::of(2.0));
                let t = b.sub(two, x);
                let t = b.sub(t, y);
                b.min(s, t)
            }
            XorVariant::Sine => {
                let s = b.add(x, y);
                let s = b.scale(s, PI / 2.0);
                b.sin(s)
            }
        }
    }

    /// XOR, pushed when `push_after_xor` is set in the unit algebra.
    pub fn xor<T: Scalar>(&self, b: &mut TapeBuilder<T>, x: Var, y: Var) -> Var {
        let r = self.xor_raw(b, x, y);
        if self.algebra == Algebra::Unit && self.variants.push_after_xor {
            self.push(b, r)
        } else {
            r
        }
    }

    /// `t(r) = 3r^2 - 2r^3`
    pub fn push<T: Scalar>(&self, b: &mut TapeBuilder<T>, r: Var) -> Var {
        let r2 = b.mul(r, r);
        let rr = b.add(r, r);
        let q = b.rsub_const(3.0, rr);
        b.mul(r2, q)
    }

    /// Digit and carry of one full-adder position.
    pub fn digit_carry<T: Scalar>(
        &self,
        b: &mut TapeBuilder<T>,
        x: Var,
        y: Var,
        c: Var,
    ) -> (Var, Var) {
        if self.algebra == Algebra::Circular {
            let xy = self.xor_raw(b, x, y);
            let d = self.xor_raw(b, xy, c);
            let m = b.mul(x, y);
            let n = b.mul(xy, c);
            let carry = self.xor_raw(b, m, n);
            return (d, carry);
        }
        let (d, carry) = match self.variants.adder_variant {
            AdderVariant::IdentityCarry => {
                let xy = self.xor_raw(b, x, y);
                let d = self.xor_raw(b, xy, c);
                let s = b.add(x, y);
                let s = b.add(s, c);
                let s = b.sub(s, d);
                (d, b.scale(s, 0.5))
            }
            AdderVariant::FullFuzzy => {
                let xy = self.xor_raw(b, x, y);
                let d = self.xor_raw(b, xy, c);
                let l = self.and(b, x, y);
                let r = self.and(b, xy, c);
                (d, self.or(b, l, r))
            }
            AdderVariant::Cosine => {
                let s = b.add(x, y);
                let s = b.add(s, c);
                let a = b.scale(s, PI);
                let a = b.cos(a);
                let d = b.rsub_const(1.0, a);
                let d = b.scale(d, 0.5);
                let carry = b.sub(s, d);
                (d, b.scale(carry, 0.5))
            }
            AdderVariant::Clamp => {
                let s = b.add(x, y);
                let s = b.add(s, c);
                let one = b.one();
                let zero = b.zero();
                let carry = b.sub(s, one);
                let carry = b.max(carry, zero);
                let carry = b.min(carry, one);
                let cc = b.add(carry, carry);
                (b.sub(s, cc), carry)
            }
        };
        if self.variants.push_after_add {
            (self.push(b, d), carry)
        } else {
            (d, carry)
        }
    }

    /// Ripple-carry addition modulo `2^n` of little-endian words.
    pub fn add<T: Scalar>(&self, b: &mut TapeBuilder<T>, x: &[Var], y: &[Var]) -> Result<Vec<Var>> {
        check_len(x, y)?;
        let mut carry = b.zero();
        Ok(x.iter()
            .zip(y)
            .map(|(&p, &q)| {
                let (d, c) = self.digit_carry(b, p, q, carry);
                carry = c;
                d
            })
            .collect())
    }

    /// Sum of several words, folded left.
    pub fn add_many<T: Scalar>(
        &self,
        b: &mut TapeBuilder<T>,
        words: &[&[Var]],
    ) -> Result<Vec<Var>> {
        let (first, rest) = words
            .split_first()
            .ok_or_else(|| Error::Usage("ADD of zero words".into()))?;
        rest.iter()
            .try_fold(first.to_vec(), |acc, w| self.add(b, &acc, w))
    }

    pub fn word_not<T: Scalar>(&self, b: &mut TapeBuilder<T>, x: &[Var]) -> Vec<Var> {
        x.iter().map(|&v| self.not(b, v)).collect()
    }

    pub fn word_and<T: Scalar>(
        &self,
        b: &mut TapeBuilder<T>,
        x: &[Var],
        y: &[Var],
    ) -> Result<Vec<Var>> {
        check_len(x, y)?;
        Ok(x.iter().zip(y).map(|(&p, &q)| self.and(b, p, q)).collect())
    }

    pub fn word_or<T: Scalar>(
        &self,
        b: &mut TapeBuilder<T>,
        x: &[Var],
        y: &[Var],
    ) -> Result<Vec<Var>> {
        check_len(x, y)?;
        Ok(x.iter().zip(y).map(|(&p, &q)| self.or(b, p, q)).collect())
    }

    pub fn word_xor<T: Scalar>(
        &self,
        b: &mut TapeBuilder<T>,
        x: &[Var],
        y: &[Var],
    ) -> Result<Vec<Var>> {
        check_len(x, y)?;
        Ok(x.iter().zip(y).map(|(&p, &q)| self.xor(b, p, q)).collect())
    }
}

fn check_len(x: &[Var], y: &[Var]) -> Result<()> {
    if x.len() == y.len() {
        Ok(())
    } else {
        Err(Error::Shape(format!(
            "word operands have lengths {} and {}",
            x.len(),
            y.len()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::super::ops::{
        adder_digit_carry, and_unit, circ_digit_carry, circ_raw, not_unit, or_unit, xor_unit,
        CircOp,
    };
    use super::*;
    use crate::autodiff::grad_check;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_variants() -> Vec<OpVariantSet> {
        let mut out = Vec::new();
        for not_variant in [NotVariant::Std, NotVariant::Square, NotVariant::Cos] {
            for and_variant in [
                AndVariant::Product,
                AndVariant::Min,
                AndVariant::Power,
                AndVariant::Asym,
            ] {
                for or_variant in [
                    OrVariant::ProbSum,
                    OrVariant::Max,
                    OrVariant::SubMin,
                    OrVariant::CapSum,
                ] {
                    for xor_variant in [
                        XorVariant::Bilinear,
                        XorVariant::NonAssoc,
                        XorVariant::AbsPow,
                        XorVariant::Tent,
                        XorVariant::Sine,
                    ] {
                        for adder_variant in [
                            AdderVariant::IdentityCarry,
                            AdderVariant::FullFuzzy,
                            AdderVariant::Cosine,
                            AdderVariant::Clamp,
                        ] {
                            for (push_after_xor, push_after_add) in [(false, false), (true, true)] {
                                out.push(OpVariantSet {
                                    not_variant,
                                    and_variant,
                                    or_variant,
                                    xor_variant,
                                    adder_variant,
                                    push_after_xor,
                                    push_after_add,
                                    p: 3.0,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn gate_tape(g: &Gates) -> crate::autodiff::Tape<f64> {
        let mut b = TapeBuilder::new();
        let [x, y, c] = [b.input(), b.input(), b.input()];
        let n = g.not(&mut b, x);
        let a = g.and(&mut b, x, y);
        let o = g.or(&mut b, x, y);
        let e = g.xor(&mut b, x, y);
        let (d, k) = g.digit_carry(&mut b, x, y, c);
        b.finish(&[n, a, o, e, d, k])
    }

    #[test]
    fn tape_matches_scalar_reference_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for v in all_variants() {
            let t = gate_tape(&Gates::new(Algebra::Unit, v));
            for _ in 0..5 {
                let p: [f64; 3] = [rng.random(), rng.random(), rng.random()];
                let out = t.forward(&p).unwrap().outputs(&t);
                let (d, k) = adder_digit_carry(p[0], p[1], p[2], &v);
                let want = [
                    not_unit(p[0], &v),
                    and_unit(p[0], p[1], &v),
                    or_unit(p[0], p[1], &v),
                    xor_unit(p[0], p[1], &v),
                    d,
                    k,
                ];
                for (o, w) in out.iter().zip(want) {
                    assert_eq!(o.to_bits(), w.to_bits(), "{v}");
                }
            }
        }
        let t = gate_tape(&Gates::new(Algebra::Circular, OpVariantSet::default()));
        for _ in 0..200 {
            let p: [f64; 3] = [
                rng.random_range(-0.999..1.0),
                rng.random_range(-0.999..1.0),
                rng.random_range(-0.999..1.0),
            ];
            let out = t.forward(&p).unwrap().outputs(&t);
            let (d, k) = circ_digit_carry(p[0], p[1], p[2]);
            let want = [
                circ_raw(CircOp::Not, p[0], 0.0),
                circ_raw(CircOp::And, p[0], p[1]),
                circ_raw(CircOp::Or, p[0], p[1]),
                circ_raw(CircOp::Xor, p[0], p[1]),
                d,
                k,
            ];
            for (o, w) in out.iter().zip(want) {
                assert_eq!(o.to_bits(), w.to_bits());
            }
        }
    }

    #[test]
    fn word_add_on_binbits_is_integer_addition() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for algebra in [Algebra::Unit, Algebra::Circular] {
            let g = Gates::new(algebra, OpVariantSet::default());
            let mut b = TapeBuilder::<f64>::new();
            let x = b.inputs(16);
            let y = b.inputs(16);
            let s = g.add(&mut b, &x, &y).unwrap();
            let t = b.finish(&s);
            for _ in 0..50 {
                let (p, q): (u16, u16) = (rng.random(), rng.random());
                let input: Vec<f64> = (0..16)
                    .map(|i| f64::from((p >> i) & 1))
                    .chain((0..16).map(|i| f64::from((q >> i) & 1)))
                    .collect();
                let out = t.forward(&input).unwrap().outputs(&t);
                let got = out
                    .iter()
                    .enumerate()
                    .fold(0u16, |acc, (i, &v)| acc | (u16::from(v.abs() >= 0.5) << i));
                assert_eq!(got, p.wrapping_add(q));
            }
        }
    }

    #[test]
    fn constant_words_fold_away() {
        let g = Gates::default();
        let mut b = TapeBuilder::<f64>::new();
        let x = g.word_const(&mut b, 0x1234_5678, 32);
        let y = g.word_const(&mut b, 0x0fed_cba9, 32);
        let s = g.add(&mut b, &x, &y).unwrap();
        let value = s.iter().enumerate().fold(0u64, |acc, (i, &v)| {
            acc | ((b.const_value(v).unwrap() as u64) << i)
        });
        assert_eq!(
            value,
            0x1234_5678u64.wrapping_add(0x0fed_cba9) & 0xffff_ffff
        );
        assert!(b.len() <= 8);
    }

    #[test]
    fn gate_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = gate_tape(&Gates::default());
        for _ in 0..50 {
            let p: [f64; 3] = [
                rng.random_range(0.05..0.95),
                rng.random_range(0.05..0.95),
                rng.random_range(0.05..0.95),
            ];
            for o in 0..t.num_outputs() {
                let r = grad_check(&t, o, &p, 1e-6).unwrap();
                assert!(r.max_rel_error < 1e-6);
            }
        }
    }

    #[test]
    fn shape_errors() {
        let g = Gates::default();
        let mut b = TapeBuilder::<f64>::new();
        let x = b.inputs(3);
        assert!(matches!(g.add(&mut b, &x, &x[..2]), Err(Error::Shape(_))));
        assert!(matches!(g.add_many(&mut b, &[]), Err(Error::Usage(_))));
    }
}
