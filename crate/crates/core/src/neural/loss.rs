use super::config::LossKind;
use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::fuzzy::{angular_distance, Algebra, FuzVector};
use crate::hash::MaskSpec;
use crate::scalar::Scalar;

/// Logarithm arguments are clamped below at `BCE_CLAMP`.
pub const BCE_CLAMP: f64 = 1e-12;

fn check(
    kind: LossKind,
    truth: usize,
    pred: usize,
    mask: &MaskSpec,
    algebra: Algebra,
) -> Result<()> {
    if truth != pred {
        return Err(Error::Shape(format!(
            "true hash has {truth} bits, prediction {pred}"
        )));
    }
    mask.validate(pred)?;
    if kind == LossKind::Bce && algebra != Algebra::Unit {
        return Err(Error::Usage(
            "binary cross-entropy needs unit fuzbits".into(),
        ));
    }
    Ok(())
}

/// Loss between a true hash and a fuzzy prediction over the masked bits.
pub fn loss<T: Scalar>(
    kind: LossKind,
    truth: &BitVector,
    pred: &FuzVector<T>,
    mask: &MaskSpec,
) -> Result<T> {
    check(kind, truth.len(), pred.len(), mask, pred.algebra())?;
    let p: Vec<f64> = pred.values().iter().map(|v| v.to_f64_lossy()).collect();
    let mut grad = vec![0.0; p.len()];
    Ok(T::of(loss_and_grad(kind, truth, &p, mask, &mut grad)))
}

/// `sum min(m', 1 - m')`, zero exactly on binbits.
pub fn binarization_penalty<T: Scalar>(message: &FuzVector<T>) -> Result<T> {
    if message.algebra() != Algebra::Unit {
        return Err(Error::Usage(
            "the binarization penalty needs unit fuzbits".into(),
        ));
    }
    let m: Vec<f64> = message.values().iter().map(|v| v.to_f64_lossy()).collect();
    Ok(T::of(penalty_and_grad(&m, 1.0, &mut vec![0.0; m.len()])))
}

/// Subgradient of `|x|`, zero at zero.
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Adds `d loss / d pred` into `grad` and returns the loss.
pub(crate) fn loss_and_grad(
    kind: LossKind,
    truth: &BitVector,
    pred: &[f64],
    mask: &MaskSpec,
    grad: &mut [f64],
) -> f64 {
    let bit = |j: usize| if truth.as_slice()[j] { 1.0 } else { 0.0 };
    match kind {
        LossKind::L1 => mask
            .indices()
            .iter()
            .map(|&j| {
                let d = pred[j] - bit(j);
                grad[j] += sign(d);
                d.abs()
            })
            .sum(),
        LossKind::Bce => {
            let n = mask.len() as f64;
            let s: f64 = mask
                .indices()
                .iter()
                .map(|&j| {
                    let (q, dq) = if truth.as_slice()[j] {
                        (pred[j], -1.0)
                    } else {
                        (1.0 - pred[j], 1.0)
                    };
                    if q > BCE_CLAMP {
                        grad[j] += dq / (q * n);
                    }
                    -q.max(BCE_CLAMP).ln()
                })
                .sum();
            s / n
        }
        LossKind::CircularAngular => mask
            .indices()
            .iter()
            .map(|&j| {
                let (a, b) = (bit(j), pred[j]);
                let r = angular_distance(a, b);
                // d/db of whichever branch attains the minimum, first one on ties
                grad[j] += if r == (a - b).abs() {
                    sign(b - a)
                } else if r == (a - b + 2.0).abs() {
                    -sign(a - b + 2.0)
                } else {
                    sign(b - a + 2.0)
                };
                r
            })
            .sum(),
    }
}

/// Adds `lambda * d penalty / d m` into `grad` and returns `lambda * penalty`.
pub(crate) fn penalty_and_grad(m: &[f64], lambda: f64, grad: &mut [f64]) -> f64 {
    m.iter()
        .zip(grad.iter_mut())
        .map(|(&v, g)| {
            // min(v, 1 - v); ties go to the first argument
            if v <= 1.0 - v {
                *g += lambda;
                lambda * v
            } else {
                *g -= lambda;
                lambda * (1.0 - v)
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{finite_difference, max_relative_error};

    fn bits(s: &str) -> BitVector {
        BitVector::from_bit_str(s).unwrap()
    }

    fn unit(v: &[f64]) -> FuzVector<f64> {
        FuzVector::new(v.to_vec(), Algebra::Unit).unwrap()
    }

    #[test]
    fn examples() {
        let full = MaskSpec::full(2);
        assert_eq!(
            loss(LossKind::L1, &bits("10"), &unit(&[1.0, 0.0]), &full).unwrap(),
            0.0
        );
        assert_eq!(
            loss(LossKind::L1, &bits("10"), &unit(&[0.0, 1.0]), &full).unwrap(),
            2.0
        );
        assert_eq!(
            loss(LossKind::Bce, &bits("1"), &unit(&[1.0]), &MaskSpec::full(1)).unwrap(),
            0.0
        );
        let only0 = MaskSpec::new(vec![0]).unwrap();
        assert_eq!(
            loss(LossKind::L1, &bits("10"), &unit(&[1.0, 1.0]), &only0).unwrap(),
            0.0
        );
    }

    #[test]
    fn bce_rejects_circular_fuzbits() {
        let p = FuzVector::<f64>::new(vec![-0.5], Algebra::Circular).unwrap();
        assert!(matches!(
            loss(LossKind::Bce, &bits("1"), &p, &MaskSpec::full(1)),
            Err(Error::Usage(_))
        ));
        assert!(loss(
            LossKind::CircularAngular,
            &bits("1"),
            &p,
            &MaskSpec::full(1)
        )
        .is_ok());
        assert!(binarization_penalty(&p).is_err());
    }

    #[test]
    fn shape_and_mask_errors() {
        assert!(loss(LossKind::L1, &bits("10"), &unit(&[1.0]), &MaskSpec::full(1)).is_err());
        assert!(loss(LossKind::L1, &bits("1"), &unit(&[1.0]), &MaskSpec::full(2)).is_err());
    }

    #[test]
    fn angular_wraps_around() {
        let p = FuzVector::<f64>::new(vec![-0.9, 0.9], Algebra::Circular).unwrap();
        let l = loss(
            LossKind::CircularAngular,
            &bits("11"),
            &p,
            &MaskSpec::full(2),
        )
        .unwrap();
        assert!((l - 0.2).abs() < 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let truth = bits("1011001");
        let mask = MaskSpec::new(vec![0, 2, 3, 6]).unwrap();
        let unit_point = [0.3, 0.8, 0.1, 0.65, 0.4, 0.2, 0.9];
        let circ_point = [-0.7, 0.3, 0.1, 0.65, -0.4, 0.2, -0.2];
        for (kind, point) in [
            (LossKind::L1, unit_point),
            (LossKind::Bce, unit_point),
            (LossKind::CircularAngular, circ_point),
        ] {
            let mut ad = vec![0.0; 7];
            loss_and_grad(kind, &truth, &point, &mask, &mut ad);
            let fd = finite_difference(
                |p| Ok(loss_and_grad(kind, &truth, p, &mask, &mut [0.0; 7])),
                &point,
                1e-6,
            )
            .unwrap();
            assert!(max_relative_error(&fd, &ad) < 1e-6, "{kind:?}");
        }
        let mut ad = vec![0.0; 7];
        penalty_and_grad(&unit_point, 0.5, &mut ad);
        let fd = finite_difference(
            |p| Ok(penalty_and_grad(p, 0.5, &mut [0.0; 7])),
            &unit_point,
            1e-6,
        )
        .unwrap();
        assert!(max_relative_error(&fd, &ad) < 1e-6);
    }

    #[test]
    fn penalty_vanishes_on_binbits() {
        assert_eq!(binarization_penalty(&unit(&[0.0, 1.0, 1.0])).unwrap(), 0.0);
        assert_eq!(binarization_penalty(&unit(&[0.5, 0.25])).unwrap(), 0.75);
    }
}
