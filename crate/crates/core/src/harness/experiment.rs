use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::config::{ExperimentConfig, Precision};
use super::report::{histogram_svg, loss_svg, per_bit_svg, EvalReport, MissStats};
use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::fuzzy::Algebra;
use crate::hash::{digest_bits, HashSpec, MaskSpec};
use crate::neural::{
    embed_output, hash_rows, loss_history_csv, random_messages, Checkpoint, Mlp, Trainer,
};
use crate::rng;
use crate::scalar::Scalar;

/// `n` uniform `r`-bit messages from the test stream of `seed`.
pub fn generate_messages(n: usize, r: usize, seed: u64) -> Result<Vec<BitVector>> {
    if n == 0 || r == 0 {
        return Err(Error::Usage(
            "need at least one message of at least one bit".into(),
        ));
    }
    Ok(random_messages(n, r, &mut rng::stream(seed, rng::TEST)))
}

/// Mask positions (indices into the mask) where the two hashes differ.
fn missed_positions(truth: &BitVector, pred: &BitVector, mask: &MaskSpec) -> Result<Vec<usize>> {
    let need = mask.indices().last().map_or(0, |&i| i + 1);
    if truth.len() != pred.len() || truth.len() < need {
        return Err(Error::Shape(format!(
            "cannot compare {}-bit and {}-bit hashes under a mask reaching bit {}",
            truth.len(),
            pred.len(),
            need.saturating_sub(1)
        )));
    }
    let (t, p) = (truth.as_slice(), pred.as_slice());
    Ok(mask
        .indices()
        .iter()
        .enumerate()
        .filter(|(_, &j)| t[j] != p[j])
        .map(|(pos, _)| pos)
        .collect())
}

/// Number of masked hash bits that differ.
pub fn count_misses(truth: &BitVector, pred: &BitVector, mask: &MaskSpec) -> Result<usize> {
    Ok(missed_positions(truth, pred, mask)?.len())
}

/// Rounds network outputs to binbit messages.
pub fn round_predictions<T: Scalar>(
    y: &Array2<T>,
    model: &Mlp<T>,
    algebra: Algebra,
) -> Vec<BitVector> {
    let embedding = model.config().circular_embedding;
    y.rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .map(|&v| embed_output(v, algebra, embedding).abs() >= 0.5)
                .collect()
        })
        .collect()
}

fn miss_table(
    spec: &HashSpec,
    truths: &[BitVector],
    guesses: &[BitVector],
    mask: &MaskSpec,
) -> Result<Vec<Vec<usize>>> {
    truths
        .iter()
        .zip(guesses)
        .map(|(t, g)| missed_positions(t, &digest_bits(spec, g)?, mask))
        .collect()
}

/// Runs the testing protocol on `model` and compares with random guessing.
pub fn evaluate<T: Scalar>(
    model: &Mlp<T>,
    cfg: &ExperimentConfig,
    history: &[f64],
) -> Result<EvalReport> {
    cfg.validate()?;
    if model.config().layer_sizes != cfg.mlp.layer_sizes {
        return Err(Error::Config(
            "model layers differ from the experiment config".into(),
        ));
    }
    let spec = &cfg.spec;
    let mask = cfg.mask();
    let n = cfg.test_set_size;
    let messages = generate_messages(n, cfg.message_bits, cfg.test_seed)?;
    let truths = messages
        .iter()
        .map(|m| digest_bits(spec, m))
        .collect::<Result<Vec<_>>>()?;

    let mut predicted = Vec::with_capacity(n);
    for chunk in truths.chunks(256) {
        let y = model.forward(hash_rows::<T>(chunk).view())?;
        predicted.extend(round_predictions(&y, model, spec.algebra));
    }
    let pred_misses = miss_table(spec, &truths, &predicted, &mask)?;

    let random = random_messages(
        n,
        cfg.message_bits,
        &mut rng::stream(cfg.test_seed, rng::BASELINE),
    );
    let rand_misses = miss_table(spec, &truths, &random, &mask)?;

    Ok(EvalReport {
        name: cfg.name.clone(),
        test_set_size: n,
        mask: mask.indices().to_vec(),
        exact_inversions: pred_misses.iter().filter(|m| m.is_empty()).count(),
        predicted: MissStats::from_misses(&pred_misses, mask.len()),
        random_baseline: MissStats::from_misses(&rand_misses, mask.len()),
        epochs_trained: history.len(),
        loss_history: history.to_vec(),
        config: cfg.clone(),
    })
}

/// Result of [`run_experiment`].
#[derive(Debug)]
pub struct Outcome<T> {
    pub model: Mlp<T>,
    pub trainer_state: crate::neural::NadamState,
    pub history: Vec<f64>,
    pub report: EvalReport,
}

/// Trains a fresh network per `cfg` and evaluates it.
pub fn run_experiment<T: Scalar>(cfg: &ExperimentConfig) -> Result<Outcome<T>> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    let model = Mlp::<T>::new(cfg.mlp.clone())?;
    let mut trainer = Trainer::new(model, &cfg.spec, &cfg.mask(), &cfg.train)?;
    trainer.train(cfg.train.epochs)?;
    let history = trainer.history().to_vec();
    let report = evaluate(&trainer.model, cfg, &history)?;
    log::info!(
        "{} ({:.1}s)",
        report.summary(),
        start.elapsed().as_secs_f64()
    );
    Ok(Outcome {
        trainer_state: trainer.optimizer.clone(),
        model: trainer.into_model(),
        history,
        report,
    })
}

/// A finished run with the network stored as a checkpoint, whatever its precision.
#[derive(Debug)]
pub struct RunArtifacts {
    pub checkpoint: Checkpoint,
    pub report: EvalReport,
}

fn artifacts<T: Scalar>(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    let out = run_experiment::<T>(cfg)?;
    let mut checkpoint = Checkpoint::capture(&out.model, Some(&out.trainer_state), &out.history);
    checkpoint.echo = serde_json::to_value(cfg)?;
    Ok(RunArtifacts {
        checkpoint,
        report: out.report,
    })
}

/// [`run_experiment`] in the precision the config asks for.
pub fn run(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    match cfg.precision {
        Precision::F64 => artifacts::<f64>(cfg),
        Precision::F32 => artifacts::<f32>(cfg),
    }
}

/// [`evaluate`] for a stored network.
pub fn evaluate_checkpoint(checkpoint: &Checkpoint, cfg: &ExperimentConfig) -> Result<EvalReport> {
    match cfg.precision {
        Precision::F64 => evaluate(&checkpoint.restore::<f64>()?, cfg, &checkpoint.history),
        Precision::F32 => evaluate(&checkpoint.restore::<f32>()?, cfg, &checkpoint.history),
    }
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes `checkpoint.json` and `loss.csv`.
pub fn write_checkpoint(dir: &Path, checkpoint: &Checkpoint) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(vec![
        write(dir.join("checkpoint.json"), &checkpoint.to_json())?,
        write(dir.join("loss.csv"), &loss_history_csv(&checkpoint.history))?,
    ])
}

/// Writes `report.json`, the two CSV tables and the three charts.
pub fn write_report(dir: &Path, report: &EvalReport) -> Result<Vec<PathBuf>> {
    // render everything first so a failure leaves no partial report behind
    let files = [
        ("report.json", report.to_json()),
        ("histogram.csv", report.histogram_csv()),
        ("per_bit.csv", report.per_bit_csv()),
        ("loss.svg", loss_svg(&report.loss_history)?),
        ("histogram.svg", histogram_svg(report)?),
        ("per_bit.svg", per_bit_svg(report)?),
    ];
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    files
        .into_iter()
        .map(|(name, body)| write(dir.join(name), &body))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::Algorithm;
    use crate::neural::{MlpConfig, TrainConfig};

    fn toy_cfg(epochs: usize) -> ExperimentConfig {
        ExperimentConfig {
            name: "toy".into(),
            description: String::new(),
            spec: HashSpec::new(Algorithm::AddToy),
            mask: None,
            message_bits: 64,
            mlp: MlpConfig::new(vec![32, 16, 64]),
            train: TrainConfig {
                samples_per_epoch: 128,
                batch_size: 32,
                epochs,
                ..Default::default()
            },
            test_set_size: 64,
            test_seed: 5,
            precision: Precision::F64,
            output_dir: None,
        }
    }

    #[test]
    fn message_generation() {
        let a = generate_messages(1024, 64, 3).unwrap();
        assert_eq!(a, generate_messages(1024, 64, 3).unwrap());
        let ones: usize = a.iter().map(BitVector::count_ones).sum();
        let mean = ones as f64 / (1024.0 * 64.0);
        assert!((0.47..0.53).contains(&mean));
        let one_bit = generate_messages(20, 1, 3).unwrap();
        assert!(one_bit.iter().all(|m| m.len() == 1));
        assert!(generate_messages(0, 4, 0).is_err());
    }

    #[test]
    fn miss_counting() {
        let h = BitVector::from_bit_str("10110").unwrap();
        let c = BitVector::from_bit_str("01001").unwrap();
        assert_eq!(count_misses(&h, &h, &MaskSpec::full(5)).unwrap(), 0);
        assert_eq!(count_misses(&h, &c, &MaskSpec::full(5)).unwrap(), 5);
        assert_eq!(
            count_misses(&h, &c, &MaskSpec::new(vec![1, 3]).unwrap()).unwrap(),
            2
        );
        assert!(count_misses(&h, &c.slice(0..4), &MaskSpec::full(4)).is_err());
    }

    #[test]
    fn zero_epochs_is_the_untrained_evaluation() {
        let cfg = toy_cfg(0);
        let out = run_experiment::<f64>(&cfg).unwrap();
        let fresh = Mlp::<f64>::new(cfg.mlp.clone()).unwrap();
        assert_eq!(out.report, evaluate(&fresh, &cfg, &[]).unwrap());
        assert_eq!(out.report.predicted.cases(), 64);
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = toy_cfg(2);
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.report.to_json(), b.report.to_json());
        assert_eq!(a.checkpoint.to_json(), b.checkpoint.to_json());
        let again = evaluate_checkpoint(&a.checkpoint, &cfg).unwrap();
        assert_eq!(again.to_json(), a.report.to_json());
    }

    #[test]
    fn artifacts_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let run = run(&toy_cfg(1)).unwrap();
        let files = write_report(dir.path(), &run.report).unwrap();
        assert_eq!(files.len(), 6);
        write_checkpoint(dir.path(), &run.checkpoint).unwrap();
        let loss = std::fs::read_to_string(dir.path().join("loss.csv")).unwrap();
        assert_eq!(loss.lines().count(), 2);
        let back = EvalReport::from_json(&std::fs::read_to_string(&files[0]).unwrap()).unwrap();
        assert_eq!(back, run.report);
    }
}
