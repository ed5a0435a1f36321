//! Training through the fuzzy hash.

use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::config::{CircularEmbedding, InputMode, LossKind, MlpConfig, TrainConfig};
use super::loss::{loss_and_grad, penalty_and_grad};
use super::mlp::Mlp;
use super::optim::NadamState;
use crate::autodiff::Evaluation;
use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::fuzzy::Algebra;
use crate::hash::{compile, digest_bits, Circuit, HashSpec, MaskSpec};
use crate::rng;
use crate::scalar::Scalar;

/// Maps network outputs in `(0, 1)` to message fuzbits of `algebra`.
pub fn embed_output<T: Scalar>(y: T, algebra: Algebra, embedding: CircularEmbedding) -> f64 {
    let y = y.to_f64_lossy();
    match (algebra, embedding) {
        (Algebra::Circular, CircularEmbedding::Affine) => 2.0 * y - 1.0,
        _ => y,
    }
}

/// Network input for a hash: binbits as `0.0` / `1.0`.
pub fn hash_rows<T: Scalar>(hashes: &[BitVector]) -> Array2<T> {
    let k = hashes.first().map_or(0, |h| h.len());
    Array2::from_shape_fn((hashes.len(), k), |(i, j)| {
        if hashes[i].as_slice()[j] {
            T::one()
        } else {
            T::zero()
        }
    })
}

/// Checks that a network fits a hash and a message length.
pub fn check_binding(
    mlp: &MlpConfig,
    spec: &HashSpec,
    mask: &MaskSpec,
    message_bits: usize,
) -> Result<()> {
    spec.validate()?;
    mlp.validate()?;
    mask.validate(spec.out_bits())?;
    if mlp.input_size() != spec.out_bits() {
        return Err(Error::Config(format!(
            "network input size {} differs from the hash length {}",
            mlp.input_size(),
            spec.out_bits()
        )));
    }
    if mlp.output_size() != message_bits {
        return Err(Error::Config(format!(
            "network output size {} differs from the message length {message_bits}",
            mlp.output_size()
        )));
    }
    Ok(())
}

/// A network bound to a hash, with its optimizer and loss history.
#[derive(Debug)]
pub struct Trainer<T> {
    pub model: Mlp<T>,
    pub optimizer: NadamState,
    spec: HashSpec,
    mask: MaskSpec,
    cfg: TrainConfig,
    circuit: Arc<Circuit<f64>>,
    single_hash: Option<BitVector>,
    dropout_rng: ChaCha8Rng,
    history: Vec<f64>,
}

impl<T: Scalar> Trainer<T> {
    pub fn new(model: Mlp<T>, spec: &HashSpec, mask: &MaskSpec, cfg: &TrainConfig) -> Result<Self> {
        let message_bits = model.output_size();
        check_binding(model.config(), spec, mask, message_bits)?;
        cfg.validate()?;
        if spec.algebra == Algebra::Circular {
            if cfg.loss == LossKind::Bce {
                return Err(Error::Config("bce loss needs the unit algebra".into()));
            }
            if cfg.binarization_penalty > 0.0 {
                return Err(Error::Config(
                    "the binarization penalty needs the unit algebra".into(),
                ));
            }
        }
        let single_hash = cfg.input_mode.single_hash(spec.out_bits())?;
        Ok(Self {
            model,
            optimizer: NadamState::from_config(cfg),
            spec: spec.clone(),
            mask: mask.clone(),
            cfg: cfg.clone(),
            circuit: compile::<f64>(spec, message_bits)?,
            single_hash,
            dropout_rng: rng::stream(cfg.rng_seed, rng::DROPOUT),
            history: vec![],
        })
    }

    /// Mean batch loss of every finished epoch.
    pub fn history(&self) -> &[f64] {
        &self.history
    }

    pub fn epochs_done(&self) -> usize {
        self.history.len()
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn into_model(self) -> Mlp<T> {
        self.model
    }

    fn sample_hashes(&self, data: &mut ChaCha8Rng, n: usize) -> Result<Vec<BitVector>> {
        let k = self.spec.out_bits();
        let r = self.model.output_size();
        (0..n)
            .map(|_| match (&self.cfg.input_mode, &self.single_hash) {
                (_, Some(h)) => Ok(h.clone()),
                (InputMode::RandomStrings, _) => Ok(BitVector::random(k, data)),
                _ => digest_bits(&self.spec, &BitVector::random(r, data)),
            })
            .collect()
    }

    /// One pass over `samples_per_epoch` samples; returns the mean batch loss.
    pub fn train_epoch(&mut self) -> Result<f64> {
        let epoch = self.history.len();
        let stream = if self.cfg.fixed_training_set {
            rng::TRAIN_DATA
        } else {
            rng::TRAIN_DATA + epoch as u64
        };
        let mut data = rng::stream(self.cfg.rng_seed, stream);
        let batches = self.cfg.batches_per_epoch();
        let mut total = 0.0;
        for batch in 0..batches {
            total += self.train_batch(&mut data).map_err(|e| Error::Training {
                epoch,
                batch,
                source: Box::new(e),
            })?;
        }
        let loss = total / batches as f64;
        log::info!("epoch {epoch}: loss {loss:.6}");
        self.history.push(loss);
        Ok(loss)
    }

    pub fn train(&mut self, epochs: usize) -> Result<&[f64]> {
        for _ in 0..epochs {
            self.train_epoch()?;
        }
        Ok(&self.history)
    }

    fn train_batch(&mut self, data: &mut ChaCha8Rng) -> Result<f64> {
        let n = self.cfg.batch_size;
        let hashes = self.sample_hashes(data, n)?;
        let x = hash_rows::<T>(&hashes);
        let cache = self.model.forward_train(x.view(), &mut self.dropout_rng)?;
        let (loss, grad_out) = self.output_gradient(&hashes, cache.output())?;
        let mut grads = self.model.backward(&cache, &grad_out)?;
        if self.cfg.weight_decay > 0.0 {
            let wd = T::of(self.cfg.weight_decay);
            for (g, p) in grads.dense.iter_mut().zip(self.model.layers()) {
                g.weights.scaled_add(wd, &p.weights);
            }
        }
        let mut blocks = self.model.param_blocks(&grads);
        self.optimizer.step(&mut blocks, self.cfg.learning_rate)?;
        Ok(loss)
    }

    /// Batch loss and its gradient with respect to the network output.
    fn output_gradient(&self, hashes: &[BitVector], y: &Array2<T>) -> Result<(f64, Array2<T>)> {
        let n = hashes.len() as f64;
        let algebra = self.spec.algebra;
        let embedding = self.model.config().circular_embedding;
        let scale = match (algebra, embedding) {
            (Algebra::Circular, CircularEmbedding::Affine) => 2.0,
            _ => 1.0,
        };
        let lambda = self.cfg.binarization_penalty;
        let mut eval = Evaluation::new();
        let mut grad = Array2::zeros(y.raw_dim());
        let mut total = 0.0;
        for (i, row) in y.rows().into_iter().enumerate() {
            let m: Vec<f64> = row
                .iter()
                .map(|&v| embed_output(v, algebra, embedding))
                .collect();
            let h = self.circuit.eval(&m, &mut eval)?;
            let mut seeds = vec![0.0; h.len()];
            let mut l = loss_and_grad(self.cfg.loss, &hashes[i], &h, &self.mask, &mut seeds);
            let mut gm = self.circuit.vjp(&mut eval, &seeds)?;
            if lambda > 0.0 {
                l += penalty_and_grad(&m, lambda, &mut gm);
            }
            if !l.is_finite() {
                return Err(Error::NonFiniteGradient("loss".into()));
            }
            total += l;
            for (g, d) in grad.row_mut(i).iter_mut().zip(&gm) {
                *g = T::of(d * scale / n);
            }
        }
        Ok((total / n, grad))
    }

    /// Mean loss over `hashes` in inference mode, without training.
    pub fn evaluate_loss(&self, hashes: &[BitVector]) -> Result<f64> {
        let y = self.model.forward(hash_rows::<T>(hashes).view())?;
        Ok(self.output_gradient(hashes, &y)?.0)
    }
}

/// Random messages of `r` bits, `n` of them, from `rng`.
pub fn random_messages<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Vec<BitVector> {
    (0..n).map(|_| BitVector::random(r, rng)).collect()
}

/// `epoch,loss` rows with a header.
pub fn loss_history_csv(history: &[f64]) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(["epoch", "loss"]).expect("in-memory write");
    for (i, l) in history.iter().enumerate() {
        w.write_record([(i + 1).to_string(), format!("{l:?}")])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::Algorithm;

    fn toy() -> (HashSpec, MaskSpec) {
        (HashSpec::new(Algorithm::AddToy), MaskSpec::full(32))
    }

    fn small_cfg() -> TrainConfig {
        TrainConfig {
            samples_per_epoch: 64,
            batch_size: 16,
            epochs: 2,
            ..Default::default()
        }
    }

    #[test]
    fn binding_is_checked() {
        let (spec, mask) = toy();
        let m = Mlp::<f64>::new(MlpConfig::new(vec![32, 8, 63])).unwrap();
        assert!(Trainer::new(m, &spec, &mask, &small_cfg()).is_err());
        let m = Mlp::<f64>::new(MlpConfig::new(vec![31, 8, 64])).unwrap();
        assert!(Trainer::new(m, &spec, &mask, &small_cfg()).is_err());
    }

    #[test]
    fn training_is_deterministic() {
        let (spec, mask) = toy();
        let run = || {
            let m = Mlp::<f64>::new(MlpConfig::new(vec![32, 16, 64])).unwrap();
            let mut t = Trainer::new(m, &spec, &mask, &small_cfg()).unwrap();
            t.train(2).unwrap();
            (t.history().to_vec(), t.model)
        };
        let (h1, m1) = run();
        let (h2, m2) = run();
        assert_eq!(h1, h2);
        assert_eq!(m1, m2);
        assert!(h1.iter().all(|l| *l >= 0.0));
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let (spec, mask) = toy();
        let m = Mlp::<f64>::new(MlpConfig::new(vec![32, 16, 64])).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.0,
            ..small_cfg()
        };
        let mut t = Trainer::new(m.clone(), &spec, &mask, &cfg).unwrap();
        t.train(1).unwrap();
        assert_eq!(t.model.layers(), m.layers());
        for (a, b) in t.model.norms().iter().zip(m.norms()) {
            assert_eq!((&a.gamma, &a.beta), (&b.gamma, &b.beta));
        }
    }

    #[test]
    fn single_hash_with_output_layer_only() {
        let spec = HashSpec::new(Algorithm::Sha1).with_rounds(1);
        let target = digest_bits(&spec, &BitVector::from_bytes(b"abcd")).unwrap();
        let cfg = TrainConfig {
            input_mode: InputMode::SingleHash(target.to_hex()),
            ..small_cfg()
        };
        let m = Mlp::<f64>::new(MlpConfig::new(vec![160, 32])).unwrap();
        let mut t = Trainer::new(m, &spec, &MaskSpec::full(160), &cfg).unwrap();
        let first = t.train_epoch().unwrap();
        t.train(20).unwrap();
        assert!(*t.history().last().unwrap() < first);
    }

    #[test]
    fn circular_and_penalty_options_train() {
        let spec = HashSpec::keccak(256)
            .with_rounds(1)
            .with_algebra(Algebra::Circular);
        let mut mcfg = MlpConfig::new(vec![256, 16, 16]);
        mcfg.circular_embedding = CircularEmbedding::Affine;
        let cfg = TrainConfig {
            loss: LossKind::CircularAngular,
            ..small_cfg()
        };
        let mut t = Trainer::new(
            Mlp::<f32>::new(mcfg).unwrap(),
            &spec,
            &MaskSpec::full(256),
            &cfg,
        )
        .unwrap();
        t.train(1).unwrap();
        let bad = TrainConfig {
            loss: LossKind::Bce,
            ..small_cfg()
        };
        let m = Mlp::<f32>::new(MlpConfig::new(vec![256, 16])).unwrap();
        assert!(Trainer::new(m, &spec, &MaskSpec::full(256), &bad).is_err());

        let (spec, mask) = toy();
        let cfg = TrainConfig {
            binarization_penalty: 0.1,
            loss: LossKind::Bce,
            ..small_cfg()
        };
        let m = Mlp::<f64>::new(MlpConfig::new(vec![32, 16, 64])).unwrap();
        let mut t = Trainer::new(m, &spec, &mask, &cfg).unwrap();
        assert!(t.train(1).unwrap()[0] > 0.0);
    }

    #[test]
    fn csv_history() {
        assert_eq!(
            loss_history_csv(&[1.5, 0.25]),
            "epoch,loss\n1,1.5\n2,0.25\n"
        );
    }
}
