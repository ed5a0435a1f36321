//! `fuzhash`: digests, sensitivity traces, and inversion experiments.
//!
//! Exit codes: 0 on success, 1 for invalid input or configuration,
//! 2 for runtime and numeric failures.

mod spec_args;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fuzhash::harness::{self, presets, ExperimentConfig, RunArtifacts};
use fuzhash::hash::{digest_bits, digest_fuzzy, fuzzy_sensitivity, fuzzy_sensitivity_trace};
use fuzhash::neural::Checkpoint;
use fuzhash::{Algebra, Error, FuzVector, Result};
use spec_args::{Message, MessageArgs, SpecArgs};

/// Base directory for run artifacts when neither `--out` nor the config names one.
const OUT_DIR_ENV: &str = "FUZHASH_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "fuzhash",
    version,
    about = "Fuzzy-bit hash functions and neural inversion experiments"
)]
struct Cli {
    /// Log training progress.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a binary digest as hex, or a fuzzy digest as a CSV row.
    Digest {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        message: MessageArgs,
    },
    /// Sweep one message bit and record one hash bit.
    Trace {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        message: MessageArgs,
        /// Message bit to vary.
        #[arg(long)]
        m_index: usize,
        /// Hash bit to observe.
        #[arg(long)]
        h_index: usize,
        /// Evenly spaced points across the fuzbit domain.
        #[arg(long, default_value_t = 101)]
        samples: usize,
        /// Evaluate at these values instead of a sweep.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Vec<f64>,
        /// Write the curve as CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also draw the curve as SVG here
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Train a network and write `checkpoint.json` and `loss.csv`.
    Train(RunArgs),
    /// Evaluate a stored network and write the report files.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        /// Defaults to `checkpoint.json` in the output directory.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Train and evaluate several configs, each into its own directory.
    Sweep {
        /// Config files.
        configs: Vec<PathBuf>,
        /// Shipped presets, comma-separated, or `all`.
        #[arg(long, value_delimiter = ',')]
        presets: Vec<String>,
        /// Overrides each config's epoch count
        #[arg(long)]
        epochs: Option<usize>,
        /// Base directory; each run goes to `<out>/<name>`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run the experiments on parallel threads.
        #[arg(long)]
        parallel: bool,
    },
    /// List the shipped presets, or write them as JSON files.
    Presets {
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Experiment config file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Name of a shipped config.
    #[arg(long)]
    preset: Option<String>,
    /// Replaces the initialization, training and test seeds.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's epoch count
    #[arg(long)]
    epochs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => load_config(path)?,
            (None, Some(name)) => presets::preset(name)?,
            (None, None) => return Err(Error::Usage("give --config or --preset".into())),
        };
        if let Some(seed) = self.seed {
            cfg.mlp.init_seed = seed;
            cfg.train.rng_seed = seed;
            cfg.test_seed = seed;
        }
        if let Some(epochs) = self.epochs {
            cfg.train.epochs = epochs;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| default_out_dir(cfg, None))
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::from_json(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// `base/<name>` if a base is given, else the config's own directory, else
/// `$FUZHASH_OUT_DIR/<name>`, else `runs/<name>`.
fn default_out_dir(cfg: &ExperimentConfig, base: Option<&Path>) -> PathBuf {
    let name = if cfg.name.is_empty() {
        "experiment"
    } else {
        &cfg.name
    };
    if let Some(base) = base {
        return base.join(name);
    }
    if let Some(dir) = &cfg.output_dir {
        return dir.clone();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(base) => PathBuf::from(base).join(name),
        None => PathBuf::from("runs").join(name),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn join_reals(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn digest(spec: &SpecArgs, message: &MessageArgs) -> Result<()> {
    let spec = spec.spec()?;
    match message.message()? {
        Message::Binary(bits) => println!("{}", digest_bits(&spec, &bits)?.to_hex()),
        Message::Fuzzy(values) => {
            let m = FuzVector::new(values, spec.algebra)?;
            println!(
                "{}",
                join_reals(digest_fuzzy(&spec, &m)?.values().iter().copied())
            );
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn trace(
    spec: &SpecArgs,
    message: &MessageArgs,
    m_index: usize,
    h_index: usize,
    samples: usize,
    at: &[f64],
    csv: Option<&Path>,
    svg: Option<&Path>,
) -> Result<()> {
    let spec = spec.spec()?;
    let message = message.binary()?;
    let curve = if at.is_empty() {
        fuzzy_sensitivity_trace(&spec, &message, m_index, h_index, samples)?
    } else {
        fuzzy_sensitivity(&spec, &message, m_index, h_index, at)?
    };
    let mut table = format!("m{m_index},h{h_index}\n");
    for (m, h) in &curve {
        table += &format!("{m},{h}\n");
    }
    match csv {
        Some(path) => write_file(path, &table)?,
        None => print!("{table}"),
    }
    if let Some(path) = svg {
        let x = match spec.algebra {
            Algebra::Unit => (0.0, 1.0),
            Algebra::Circular => (-1.0, 1.0),
        };
        let chart = harness::curve_svg(
            &format!("hash bit {h_index} against message bit {m_index}"),
            (&format!("m{m_index}"), &format!("h{h_index}")),
            &curve,
            x,
            x,
        )?;
        write_file(path, &chart)?;
    }
    Ok(())
}

fn train(args: &RunArgs) -> Result<()> {
    let cfg = args.config()?;
    let dir = args.out_dir(&cfg);
    let run = harness::run(&cfg)?;
    harness::write_checkpoint(&dir, &run.checkpoint)?;
    write_file(&dir.join("config.json"), &(cfg.to_json() + "\n"))?;
    println!("{}", run.report.summary());
    println!("wrote {}", dir.display());
    Ok(())
}

fn eval(args: &RunArgs, checkpoint: Option<&Path>) -> Result<()> {
    let cfg = args.config()?;
    let dir = args.out_dir(&cfg);
    let path = checkpoint.map_or_else(|| dir.join("checkpoint.json"), Path::to_path_buf);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let stored = Checkpoint::from_json(&text)?;
    let report = harness::evaluate_checkpoint(&stored, &cfg)?;
    harness::write_report(&dir, &report)?;
    println!("{}", report.summary());
    println!("wrote {}", dir.display());
    Ok(())
}

fn sweep(
    configs: &[PathBuf],
    names: &[String],
    epochs: Option<usize>,
    out: Option<&Path>,
    parallel: bool,
) -> Result<()> {
    let mut cfgs = configs
        .iter()
        .map(|p| load_config(p))
        .collect::<Result<Vec<_>>>()?;
    for name in names {
        if name == "all" {
            cfgs.extend(
                presets::names()
                    .map(presets::preset)
                    .collect::<Result<Vec<_>>>()?,
            );
        } else {
            cfgs.push(presets::preset(name)?);
        }
    }
    if cfgs.is_empty() {
        return Err(Error::Usage("sweep needs config files or --presets".into()));
    }
    for cfg in &mut cfgs {
        if let Some(e) = epochs {
            cfg.train.epochs = e;
        }
        cfg.validate()?;
    }
    let finish = |cfg: &ExperimentConfig, run: RunArtifacts| -> Result<String> {
        let dir = default_out_dir(cfg, out);
        harness::write_checkpoint(&dir, &run.checkpoint)?;
        harness::write_report(&dir, &run.report)?;
        Ok(run.report.summary())
    };
    if parallel {
        let results: Vec<Result<RunArtifacts>> = std::thread::scope(|s| {
            let handles: Vec<_> = cfgs
                .iter()
                .map(|cfg| s.spawn(move || harness::run(cfg)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("experiment thread panicked"))
                .collect()
        });
        for (cfg, run) in cfgs.iter().zip(results) {
            println!("{}", finish(cfg, run?)?);
        }
    } else {
        for cfg in &cfgs {
            println!("{}", finish(cfg, harness::run(cfg)?)?);
        }
    }
    Ok(())
}

fn list_presets(dump: Option<&Path>) -> Result<()> {
    let mut listing = String::new();
    for (name, json) in presets::PRESETS {
        match dump {
            Some(dir) => write_file(&dir.join(format!("{name}.json")), json)?,
            None => listing += &format!("{name:24} {}\n", presets::preset(name)?.description),
        }
    }
    // a closed pipe (`| head`) is not an error worth reporting
    let _ = std::io::Write::write_all(&mut std::io::stdout(), listing.as_bytes());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Digest { spec, message } => digest(spec, message),
        Command::Trace {
            spec,
            message,
            m_index,
            h_index,
            samples,
            at,
            csv,
            svg,
        } => trace(
            spec,
            message,
            *m_index,
            *h_index,
            *samples,
            at,
            csv.as_deref(),
            svg.as_deref(),
        ),
        Command::Train(args) => train(args),
        Command::Eval { run, checkpoint } => eval(run, checkpoint.as_deref()),
        Command::Sweep {
            configs,
            presets,
            epochs,
            out,
            parallel,
        } => sweep(configs, presets, *epochs, out.as_deref(), *parallel),
        Command::Presets { dump } => list_presets(dump.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .format_timestamp(None)
        .init();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
