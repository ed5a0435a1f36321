use super::tape::{apply, Kind, Tape};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-evaluation scratch: node values from the forward sweep and the
/// adjoints of the last reverse sweep. A tape can be evaluated concurrently
/// with one `Evaluation` per thread.
#[derive(Clone, Debug, Default)]
pub struct Evaluation<T> {
    values: Vec<T>,
    adjoints: Vec<T>,
}

impl<T: Scalar> Evaluation<T> {
    pub fn new() -> Self {
        Self {
            values: Vec::new(),
            adjoints: Vec::new(),
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, node: usize) -> T {
        self.values[node]
    }

    pub fn outputs(&self, tape: &Tape<T>) -> Vec<T> {
        tape.outputs
            .iter()
            .map(|&o| self.values[o as usize])
            .collect()
    }
}

/// Derivatives of one node with respect to its two arguments.
///
/// At kinks the left branch is taken: `|x|' = -1` at 0, `clamp01' = 0` at 0
/// and 1 at 1, `min` sends the gradient to its first argument on ties and
/// `max` to its second. The hard sigmoid has slope 1/5 strictly inside
/// `(-2.5, 2.5)` and 0 elsewhere.
#[inline]
pub(crate) fn partials<T: Scalar>(kind: &Kind<T>, a: T, b: T, value: T) -> (T, T) {
    let zero = T::zero();
    let one = T::one();
    match *kind {
        Kind::Const(_) | Kind::Input(_) => (zero, zero),
        Kind::Add => (one, one),
        Kind::Sub => (one, -one),
        Kind::Mul => (b, a),
        Kind::Neg => (-one, zero),
        Kind::Recip => (-value * value, zero),
        Kind::Exp => (value, zero),
        Kind::Log => (a.recip(), zero),
        Kind::Cos => (-a.sin(), zero),
        Kind::Sin => (a.cos(), zero),
        Kind::Abs => (if a > zero { one } else { -one }, zero),
        Kind::Min => {
            if a <= b {
                (one, zero)
            } else {
                (zero, one)
            }
        }
        Kind::Max => {
            if a > b {
                (one, zero)
            } else {
                (zero, one)
            }
        }
        Kind::Clamp01 => (if a > zero && a <= one { one } else { zero }, zero),
        Kind::Sigmoid => (value * (one - value), zero),
        Kind::HardSig => {
            let edge = T::of(2.5);
            (
                if a > -edge && a < edge {
                    T::of(0.2)
                } else {
                    zero
                },
                zero,
            )
        }
        Kind::Elu => (if a >= zero { one } else { value + one }, zero),
        Kind::Pow(p) => (p * a.powf(p - one), zero),
        Kind::Wrap2 => (one, zero),
    }
}

impl<T: Scalar> Tape<T> {
    /// Evaluates every node once, in order.
    pub fn forward(&self, inputs: &[T]) -> Result<Evaluation<T>> {
        let mut eval = Evaluation::new();
        self.forward_into(inputs, &mut eval)?;
        Ok(eval)
    }

    /// Like [`Tape::forward`] but reuses the buffers of `eval`.
    pub fn forward_into(&self, inputs: &[T], eval: &mut Evaluation<T>) -> Result<()> {
        if inputs.len() != self.inputs.len() {
            return Err(Error::Shape(format!(
                "tape has {} inputs, got {}",
                self.inputs.len(),
                inputs.len()
            )));
        }
        let values = &mut eval.values;
        values.clear();
        values.reserve(self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            let v = match node.kind {
                Kind::Const(c) => c,
                Kind::Input(n) => inputs[n as usize],
                ref kind => {
                    let a = values[node.args[0] as usize];
                    let b = if kind.arity() == 2 {
                        values[node.args[1] as usize]
                    } else {
                        T::zero()
                    };
                    apply(kind, a, b)
                }
            };
            if !v.is_finite() {
                return Err(Error::NonFinite { node: i });
            }
            values.push(v);
        }
        Ok(())
    }

    /// Gradient of output `output` with respect to every input.
    pub fn backward(&self, eval: &mut Evaluation<T>, output: usize) -> Result<Vec<T>> {
        if output >= self.outputs.len() {
            return Err(Error::Usage(format!(
                "output index {output} out of range for {} outputs",
                self.outputs.len()
            )));
        }
        let mut seeds = vec![T::zero(); self.outputs.len()];
        seeds[output] = T::one();
        self.vjp(eval, &seeds)
    }

    /// Vector-Jacobian product: `sum_j seeds[j] * d output_j / d input_i` for every input `i`.
    pub fn vjp(&self, eval: &mut Evaluation<T>, seeds: &[T]) -> Result<Vec<T>> {
        if seeds.len() != self.outputs.len() {
            return Err(Error::Shape(format!(
                "tape has {} outputs, got {} seeds",
                self.outputs.len(),
                seeds.len()
            )));
        }
        if eval.values.len() != self.nodes.len() {
            return Err(Error::Usage("backward called before forward".into()));
        }
        let adj = &mut eval.adjoints;
        adj.clear();
        adj.resize(self.nodes.len(), T::zero());
        for (&o, &s) in self.outputs.iter().zip(seeds) {
            adj[o as usize] += s;
        }
        for i in (0..self.nodes.len()).rev() {
            let g = adj[i];
            if g == T::zero() {
                continue;
            }
            let node = &self.nodes[i];
            let arity = node.kind.arity();
            if arity == 0 {
                continue;
            }
            let a = eval.values[node.args[0] as usize];
            let b = if arity == 2 {
                eval.values[node.args[1] as usize]
            } else {
                T::zero()
            };
            let (da, db) = partials(&node.kind, a, b, eval.values[i]);
            adj[node.args[0] as usize] += g * da;
            if arity == 2 {
                adj[node.args[1] as usize] += g * db;
            }
        }
        Ok(self.inputs.iter().map(|&n| adj[n as usize]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::super::TapeBuilder;
    use super::*;

    fn xor_tape() -> Tape<f64> {
        // x(1 - y) + (1 - x)y
        let mut b = TapeBuilder::new();
        let x = b.input();
        let y = b.input();
        let ny = b.rsub_const(1.0, y);
        let nx = b.rsub_const(1.0, x);
        let l = b.mul(x, ny);
        let r = b.mul(nx, y);
        let out = b.add(l, r);
        b.finish(&[out])
    }

    fn push_tape() -> Tape<f64> {
        let mut b = TapeBuilder::new();
        let r = b.input();
        let r2 = b.mul(r, r);
        let rr = b.add(r, r);
        let q = b.rsub_const(3.0, rr);
        let out = b.mul(r2, q);
        b.finish(&[out])
    }

    #[test]
    fn forward_examples() {
        assert_eq!(
            xor_tape()
                .forward(&[1.0, 0.0])
                .unwrap()
                .outputs(&xor_tape()),
            vec![1.0]
        );
        let t = push_tape();
        assert_eq!(t.forward(&[0.25]).unwrap().outputs(&t), vec![0.15625]);
        let mut b = TapeBuilder::<f64>::new();
        b.input();
        let t = b.finish(&[]);
        assert!(t.forward(&[0.3]).unwrap().outputs(&t).is_empty());
    }

    #[test]
    fn backward_examples() {
        let t = xor_tape();
        let mut e = t.forward(&[0.3, 0.2]).unwrap();
        let g = t.backward(&mut e, 0).unwrap();
        assert!((g[0] - 0.6).abs() < 1e-15);
        assert!((g[1] - 0.4).abs() < 1e-15);

        let t = push_tape();
        let mut e = t.forward(&[0.5]).unwrap();
        assert!((t.backward(&mut e, 0).unwrap()[0] - 1.5).abs() < 1e-15);

        let mut b = TapeBuilder::<f64>::new();
        b.inputs(3);
        let c = b.constant(4.0);
        let t = b.finish(&[c]);
        let mut e = t.forward(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.backward(&mut e, 0).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn usage_and_numeric_errors() {
        let t = xor_tape();
        assert!(matches!(t.forward(&[1.0]), Err(Error::Shape(_))));
        let mut e = t.forward(&[1.0, 0.0]).unwrap();
        assert!(matches!(t.backward(&mut e, 1), Err(Error::Usage(_))));
        assert!(matches!(
            t.backward(&mut Evaluation::new(), 0),
            Err(Error::Usage(_))
        ));

        let mut b = TapeBuilder::<f64>::new();
        let x = b.input();
        let l = b.log(x);
        let t = b.finish(&[l]);
        assert!(matches!(
            t.forward(&[0.0]),
            Err(Error::NonFinite { node: 1 })
        ));
    }

    #[test]
    fn adjoints_are_linear() {
        let mut b = TapeBuilder::<f64>::new();
        let x = b.input();
        let y = b.input();
        let s = b.sin(x);
        let f = b.mul(s, y);
        let e = b.exp(y);
        let g = b.mul(e, x);
        let h = b.add(f, g);
        let t = b.finish(&[f, g, h]);
        let mut ev = t.forward(&[0.7, -0.4]).unwrap();
        let gf = t.backward(&mut ev, 0).unwrap();
        let gg = t.backward(&mut ev, 1).unwrap();
        let gh = t.backward(&mut ev, 2).unwrap();
        for i in 0..2 {
            assert!((gf[i] + gg[i] - gh[i]).abs() <= 1e-12);
        }
        let v = t.vjp(&mut ev, &[2.0, -1.0, 0.0]).unwrap();
        for i in 0..2 {
            assert!((2.0 * gf[i] - gg[i] - v[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn evaluation_is_bit_deterministic() {
        let t = push_tape();
        let a = t.forward(&[0.123456789]).unwrap();
        let b = t.forward(&[0.123456789]).unwrap();
        assert_eq!(
            a.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn kink_conventions() {
        let p = |k: Kind<f64>, a: f64, b: f64| partials(&k, a, b, apply(&k, a, b));
        assert_eq!(p(Kind::Abs, 0.0, 0.0).0, -1.0);
        assert_eq!(p(Kind::Min, 1.0, 1.0), (1.0, 0.0));
        assert_eq!(p(Kind::Max, 1.0, 1.0), (0.0, 1.0));
        assert_eq!(p(Kind::Clamp01, 0.0, 0.0).0, 0.0);
        assert_eq!(p(Kind::Clamp01, 1.0, 0.0).0, 1.0);
        assert_eq!(p(Kind::HardSig, 2.5, 0.0).0, 0.0);
        assert_eq!(p(Kind::HardSig, -2.5, 0.0).0, 0.0);
        assert_eq!(p(Kind::HardSig, 2.4, 0.0).0, 0.2);
        assert_eq!(p(Kind::Elu, 0.0, 0.0).0, 1.0);
    }
}
