//! Central finite-difference verification of reverse-mode gradients.

use super::eval::Evaluation;
use super::tape::{Kind, Tape};
use crate::error::Result;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheck {
    /// `max_i |fd_i - ad_i| / max(1, |fd_i|)` over the checked inputs.
    pub max_rel_error: f64,
    pub checked: usize,
    /// Inputs whose finite-difference stencil straddled a kink.
    pub skipped: usize,
}

impl GradCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_error < tol
    }
}

/// Which smooth piece of a non-smooth node its arguments fall in.
/// Kink points get their own code so touching one counts as a crossing.
fn piece<T: Scalar>(kind: &Kind<T>, a: T, b: T) -> Option<i64> {
    let side = |x: T, at: T| -> i64 {
        if x < at {
            0
        } else if x == at {
            1
        } else {
            2
        }
    };
    match *kind {
        Kind::Abs => Some(side(a, T::zero())),
        Kind::Min | Kind::Max => Some(side(a - b, T::zero())),
        Kind::Clamp01 => Some(side(a, T::zero()) * 3 + side(a, T::one())),
        Kind::HardSig => Some(side(a, T::of(-2.5)) * 3 + side(a, T::of(2.5))),
        Kind::Wrap2 => {
            let w = crate::fuzzy::wrap2(a);
            let turns = ((a - w) / T::of(2.0)).round().to_i64().unwrap_or(i64::MAX);
            Some(turns * 2 + i64::from(w == T::one()))
        }
        _ => None,
    }
}

fn pieces<T: Scalar>(tape: &Tape<T>, eval: &Evaluation<T>) -> Vec<Option<i64>> {
    tape.nodes
        .iter()
        .map(|node| {
            let arity = node.kind.arity();
            if arity == 0 {
                return None;
            }
            let a = eval.value(node.args[0] as usize);
            let b = if arity == 2 {
                eval.value(node.args[1] as usize)
            } else {
                T::zero()
            };
            piece(&node.kind, a, b)
        })
        .collect()
}

/// Compares `backward` against `(f(x + eps) - f(x - eps)) / (2 eps)` for every input.
///
/// Inputs whose stencil crosses or touches a kink of `Abs`, `Min`, `Max`,
/// `Clamp01`, `HardSig` or a `Wrap2` boundary are skipped and counted.
pub fn grad_check<T: Scalar>(
    tape: &Tape<T>,
    output: usize,
    point: &[T],
    eps: T,
) -> Result<GradCheck> {
    let mut center = tape.forward(point)?;
    let analytic = tape.backward(&mut center, output)?;
    let center_pieces = pieces(tape, &center);
    let out_node = tape.outputs[output] as usize;

    let mut report = GradCheck {
        max_rel_error: 0.0,
        checked: 0,
        skipped: 0,
    };
    let mut x = point.to_vec();
    let mut plus = Evaluation::new();
    let mut minus = Evaluation::new();
    for i in 0..point.len() {
        x[i] = point[i] + eps;
        tape.forward_into(&x, &mut plus)?;
        x[i] = point[i] - eps;
        tape.forward_into(&x, &mut minus)?;
        x[i] = point[i];

        let crosses = pieces(tape, &plus)
            .iter()
            .zip(pieces(tape, &minus))
            .zip(&center_pieces)
            .any(|((p, m), c)| p != c || m != *c || c.is_some_and(|c| c % 3 == 1));
        if crosses {
            report.skipped += 1;
            continue;
        }
        let fd = (plus.value(out_node) - minus.value(out_node)).to_f64_lossy()
            / (2.0 * eps.to_f64_lossy());
        let ad = analytic[i].to_f64_lossy();
        let rel = (fd - ad).abs() / fd.abs().max(1.0);
        report.max_rel_error = report.max_rel_error.max(rel);
        report.checked += 1;
    }
    if report.skipped > 0 {
        log::warn!(
            "grad_check skipped {} of {} inputs near kinks",
            report.skipped,
            point.len()
        );
    }
    Ok(report)
}

/// Central differences of an arbitrary scalar function.
pub fn finite_difference<F>(mut f: F, point: &[f64], eps: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut x = point.to_vec();
    let mut grad = Vec::with_capacity(point.len());
    for i in 0..point.len() {
        x[i] = point[i] + eps;
        let up = f(&x)?;
        x[i] = point[i] - eps;
        let down = f(&x)?;
        x[i] = point[i];
        grad.push((up - down) / (2.0 * eps));
    }
    Ok(grad)
}

/// `max_i |fd_i - ad_i| / max(1, |fd_i|)`
pub fn max_relative_error(fd: &[f64], ad: &[f64]) -> f64 {
    fd.iter()
        .zip(ad)
        .map(|(f, a)| (f - a).abs() / f.abs().max(1.0))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::super::TapeBuilder;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_mul() {
        let mut b = TapeBuilder::<f64>::new();
        let x = b.input();
        let y = b.input();
        let m = b.mul(x, y);
        let t = b.finish(&[m]);
        let r = grad_check(&t, 0, &[2.0, 3.0], 1e-6).unwrap();
        assert!(r.max_rel_error < 1e-7);
        assert_eq!(r.checked, 2);
    }

    #[test]
    fn sigmoid_at_zero() {
        let mut b = TapeBuilder::<f64>::new();
        let x = b.input();
        let s = b.sigmoid(x);
        let t = b.finish(&[s]);
        let fd = finite_difference(|p| Ok(t.forward(p)?.outputs(&t)[0]), &[0.0], 1e-6).unwrap();
        assert!((fd[0] - 0.25).abs() < 1e-8);
        assert!(grad_check(&t, 0, &[0.0], 1e-6).unwrap().max_rel_error < 1e-8);
    }

    #[test]
    fn kinks_are_skipped() {
        let mut b = TapeBuilder::<f64>::new();
        let x = b.input();
        let y = b.input();
        let a = b.abs(x);
        let c = b.clamp01(y);
        let s = b.add(a, c);
        let t = b.finish(&[s]);
        let r = grad_check(&t, 0, &[0.0, 1.0], 1e-6).unwrap();
        assert_eq!(r.skipped, 2);
        assert_eq!(r.checked, 0);
        let r = grad_check(&t, 0, &[0.3, 0.5], 1e-6).unwrap();
        assert_eq!(r.skipped, 0);
        assert!(r.max_rel_error < 1e-8);
    }

    fn unary_tape(kind: Kind<f64>) -> Tape<f64> {
        let mut b = TapeBuilder::<f64>::new();
        let x = b.input();
        let y = b.unary(kind, x);
        b.finish(&[y])
    }

    fn binary_tape(kind: Kind<f64>) -> Tape<f64> {
        let mut b = TapeBuilder::<f64>::new();
        let x = b.input();
        let y = b.input();
        let z = b.binary(kind, x, y);
        b.finish(&[z])
    }

    #[test]
    fn every_node_kind_at_random_interior_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let unary: Vec<(Kind<f64>, f64, f64)> = vec![
            (Kind::Neg, -3.0, 3.0),
            (Kind::Recip, 0.5, 3.0),
            (Kind::Exp, -3.0, 3.0),
            (Kind::Log, 0.1, 5.0),
            (Kind::Cos, -3.0, 3.0),
            (Kind::Sin, -3.0, 3.0),
            (Kind::Abs, -3.0, 3.0),
            (Kind::Clamp01, -0.5, 1.5),
            (Kind::Sigmoid, -6.0, 6.0),
            (Kind::HardSig, -4.0, 4.0),
            (Kind::Elu, -3.0, 3.0),
            (Kind::Pow(2.5), 0.1, 2.0),
            (Kind::Wrap2, -3.0, 3.0),
        ];
        for (kind, lo, hi) in unary {
            let t = unary_tape(kind);
            for _ in 0..100 {
                let x = rng.random_range(lo..hi);
                let r = grad_check(&t, 0, &[x], 1e-6).unwrap();
                assert!(r.max_rel_error < 1e-6, "{kind:?} at {x}: {r:?}");
            }
        }
        for kind in [Kind::Add, Kind::Sub, Kind::Mul, Kind::Min, Kind::Max] {
            let t = binary_tape(kind);
            for _ in 0..100 {
                let p = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
                let r = grad_check(&t, 0, &p, 1e-6).unwrap();
                assert!(r.max_rel_error < 1e-6, "{kind:?} at {p:?}: {r:?}");
            }
        }
    }

    #[test]
    fn relative_error_helper() {
        assert_eq!(max_relative_error(&[2.0, 0.5], &[2.0, 0.5]), 0.0);
        assert!((max_relative_error(&[4.0], &[3.0]) - 0.25).abs() < 1e-15);
        assert!((max_relative_error(&[0.1], &[0.2]) - 0.1).abs() < 1e-15);
    }
}
