//! Experiment lifecycle: training, the test protocol, reports and presets.

mod config;
mod experiment;
pub mod presets;
mod report;

pub use config::{ExperimentConfig, Precision};
pub use experiment::{
    count_misses, evaluate, evaluate_checkpoint, generate_messages, round_predictions, run,
    run_experiment, write_checkpoint, write_report, Outcome, RunArtifacts,
};
pub use report::{curve_svg, histogram_svg, loss_svg, per_bit_svg, EvalReport, MissStats};
