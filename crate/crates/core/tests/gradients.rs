//! Network backward pass chained with the circuit VJP, against finite differences.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fuzhash::autodiff::Evaluation;
use fuzhash::hash::{compile, digest_bits, Algorithm, HashSpec, MaskSpec};
use fuzhash::neural::{hash_rows, Mlp, MlpConfig};
use fuzhash::BitVector;

struct Setup {
    spec: HashSpec,
    mask: MaskSpec,
    x: Array2<f64>,
    truths: Vec<BitVector>,
}

fn setup() -> Setup {
    let spec = HashSpec::new(Algorithm::Sha1).with_rounds(1);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let messages: Vec<BitVector> = (0..3).map(|_| BitVector::random(8, &mut rng)).collect();
    let truths: Vec<BitVector> = messages
        .iter()
        .map(|m| digest_bits(&spec, m).unwrap())
        .collect();
    // a mask reaching into the word the message actually moves
    let mask = MaskSpec::new((0..8).map(|i| 3 * i + 1).collect()).unwrap();
    Setup {
        x: hash_rows::<f64>(&truths),
        spec,
        mask,
        truths,
    }
}

/// Squared error over the mask, summed over the batch; returns the loss and,
/// if asked, the gradient with respect to the network output.
fn loss(s: &Setup, y: &Array2<f64>, want_grad: bool) -> (f64, Array2<f64>) {
    let circuit = compile::<f64>(&s.spec, 8).unwrap();
    let mut total = 0.0;
    let mut grad = Array2::zeros(y.dim());
    let mut eval = Evaluation::new();
    for (i, truth) in s.truths.iter().enumerate() {
        let row: Vec<f64> = y.row(i).to_vec();
        let h = circuit.eval(&row, &mut eval).unwrap();
        let mut seeds = vec![0.0; h.len()];
        for &j in s.mask.indices() {
            let d = h[j] - if truth.as_slice()[j] { 1.0 } else { 0.0 };
            total += d * d;
            seeds[j] = 2.0 * d;
        }
        if want_grad {
            let g = circuit.vjp(&mut eval, &seeds).unwrap();
            grad.row_mut(i).assign(&ndarray::Array1::from(g));
        }
    }
    (total, grad)
}

fn check(batch_norm: bool) {
    let s = setup();
    let mut cfg = MlpConfig::new(vec![160, 4, 8]);
    cfg.batch_norm = batch_norm;
    cfg.init_seed = 3;
    let mut mlp = Mlp::<f64>::new(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    let cache = mlp.forward_train(s.x.view(), &mut rng).unwrap();
    let (_, grad_out) = loss(&s, cache.output(), true);
    let grads = mlp.backward(&cache, &grad_out).unwrap();

    let mut f = |m: &mut Mlp<f64>| {
        let c = m.forward_train(s.x.view(), &mut rng).unwrap();
        loss(&s, c.output(), false).0
    };
    let eps = 1e-6;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for layer in 0..2 {
        let (rows, cols) = grads.dense[layer].weights.dim();
        for r in 0..rows {
            for c in 0..cols {
                let ad = grads.dense[layer].weights[[r, c]];
                if layer == 0 && s.x.column(r).iter().all(|&v| v == 0.0) {
                    assert_eq!(ad, 0.0);
                    continue;
                }
                let w0 = mlp.layers()[layer].weights[[r, c]];
                mlp.layers_mut()[layer].weights[[r, c]] = w0 + eps;
                let up = f(&mut mlp);
                mlp.layers_mut()[layer].weights[[r, c]] = w0 - eps;
                let down = f(&mut mlp);
                mlp.layers_mut()[layer].weights[[r, c]] = w0;
                let fd = (up - down) / (2.0 * eps);
                worst = worst.max((fd - ad).abs() / fd.abs().max(1.0));
                checked += 1;
            }
        }
        for c in 0..grads.dense[layer].bias.len() {
            let ad = grads.dense[layer].bias[c];
            let b0 = mlp.layers()[layer].bias[c];
            mlp.layers_mut()[layer].bias[c] = b0 + eps;
            let up = f(&mut mlp);
            mlp.layers_mut()[layer].bias[c] = b0 - eps;
            let down = f(&mut mlp);
            mlp.layers_mut()[layer].bias[c] = b0;
            let fd = (up - down) / (2.0 * eps);
            worst = worst.max((fd - ad).abs() / fd.abs().max(1.0));
            checked += 1;
        }
    }
    assert!(checked > 50);
    assert!(worst < 1e-5, "max relative error {worst}");
}

#[test]
fn mlp_through_one_round_sha1() {
    check(false);
}

#[test]
fn mlp_with_batch_norm_through_one_round_sha1() {
    check(true);
}
