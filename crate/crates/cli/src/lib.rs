//! Command-line front end: `verify`, `simulate` and `sweep`.

pub mod config;
pub mod record;
pub mod sweep;
pub mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use holonoise::ensemble::{compare, run_ensemble_with, Execution, ExperimentConfig};
use holonoise::Orientation;
use thiserror::Error;

use config::ExperimentFlags;
use record::{write_records, Format, RunRecord};
use sweep::{parse_values, range_values, Spacing, SweepAxis, SweepSpec};
use verify::{run_verify, VerifyOptions, VerifyReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("simulation failed: {0}")]
    Simulation(String),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    /// 1 for failed checks and runtime errors, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "holonoise", version, about = "Squeezing-noise decoherence of a holonomic Hadamard gate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the built-in consistency checks; exits 1 if any fails
    Verify {
        /// Traverse the loops clockwise (negative control)
        #[arg(long, hide = true)]
        corrupt_orientation: bool,
    },
    /// Simulate one noise ensemble and compare it with the analytic prediction
    Simulate {
        #[command(flatten)]
        flags: ExperimentFlags,
        #[command(flatten)]
        output: OutputArgs,
        /// Exit 1 if Monte Carlo and the analytic prediction disagree
        #[arg(long)]
        check: bool,
    },
    /// Simulate one ensemble per value of a single parameter
    Sweep {
        /// Parameter to vary
        #[arg(long, value_enum)]
        axis: SweepAxis,
        /// Comma-separated values
        #[arg(long, conflicts_with = "range", allow_hyphen_values = true)]
        values: Option<String>,
        /// `start:stop:count[:log|linear]`
        #[arg(long)]
        range: Option<String>,
        #[command(flatten)]
        flags: ExperimentFlags,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file [default: stdout]
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output format [default: jsonl for simulate, csv for sweep]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; 0 uses all cores. Results do not depend on it
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(_threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    Ok(f())
}

/// Runs one ensemble and packages it with its comparison report.
pub fn simulate(config: &ExperimentConfig, threads: usize) -> Result<RunRecord, CliError> {
    let start = Instant::now();
    let result = with_threads(threads, || run_ensemble_with(config, Execution::default()))?
        .map_err(|e| CliError::Simulation(e.to_string()))?;
    let comparison = compare(&result);
    Ok(RunRecord::new(config.clone(), result, comparison, start.elapsed().as_secs_f64()))
}

pub fn run_sweep(spec: &SweepSpec, threads: usize) -> Result<Vec<RunRecord>, CliError> {
    spec.configs()?.iter().map(|cfg| simulate(cfg, threads)).collect()
}

pub fn verify(corrupt_orientation: bool) -> VerifyReport {
    let orientation = if corrupt_orientation { Orientation::Negative } else { Orientation::Positive };
    run_verify(&VerifyOptions { orientation, ..Default::default() })
}

/// Parses `start:stop:count[:log|linear]`.
pub fn parse_range(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let bad = || CliError::Usage(format!("invalid range `{text}`, expected start:stop:count[:log|linear]"));
    if !(3..=4).contains(&parts.len()) {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    let spacing = match parts.get(3) {
        None => Spacing::Linear,
        Some(s) => Spacing::from_str(s, true).map_err(|_| bad())?,
    };
    range_values(start, stop, count, spacing)
}

fn emit(records: &[RunRecord], output: &OutputArgs, default: Format) -> Result<(), CliError> {
    let format = output.format.unwrap_or(default);
    match &output.out {
        Some(path) => write_records(BufWriter::new(File::create(path)?), records, format),
        None => write_records(io::stdout().lock(), records, format),
    }
}

fn summarize(rec: &RunRecord) {
    let r = &rec.result;
    let c = &rec.comparison;
    eprintln!(
        "F = {:.10} ± {:.2e} (analytic {:.10}), I = {:.10} ± {:.2e} (analytic {:.10}), {} in {:.2} s",
        r.fidelity_mc,
        r.fidelity_stderr,
        r.prediction.fidelity,
        r.purity_mc,
        r.purity_stderr,
        r.prediction.purity,
        if c.passed { "agree" } else { "DISAGREE" },
        rec.wall_time_s,
    );
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Verify { corrupt_orientation } => {
            let report = verify(corrupt_orientation);
            println!("{report}");
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::CheckFailed("verification failed".into()))
            }
        }
        Command::Simulate { flags, output, check } => {
            let config = flags.resolve()?;
            let rec = simulate(&config, output.threads)?;
            summarize(&rec);
            emit(std::slice::from_ref(&rec), &output, Format::Jsonl)?;
            if check && !rec.comparison.passed {
                return Err(CliError::CheckFailed("Monte Carlo disagrees with the analytic prediction".into()));
            }
            Ok(())
        }
        Command::Sweep { axis, values, range, flags, output } => {
            let values = match (values, range) {
                (Some(v), None) => parse_values(&v)?,
                (None, Some(r)) => parse_range(&r)?,
                _ => return Err(CliError::Usage("sweep needs --values or --range".into())),
            };
            let spec = SweepSpec::new(axis, values, flags.resolve()?)?;
            let records = run_sweep(&spec, output.threads)?;
            records.iter().for_each(summarize);
            emit(&records, &output, Format::Csv)?;
            Ok(())
        }
    }
}

/// Flushes stdout, ignoring a closed pipe.
pub fn flush_stdout() {
    let _ = io::stdout().flush();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1:3:3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_range("1:100:3:log").unwrap().len(), 3);
        assert!(parse_range("1:2").is_err());
        assert!(parse_range("1:2:3:cubic").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::CheckFailed("x".into()).exit_code(), 1);
    }

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        let cli = Cli::try_parse_from(["holonoise", "sweep", "--axis", "gamma_x", "--values", "1,3", "--n", "10"]).unwrap();
        assert!(matches!(cli.command, Command::Sweep { axis: SweepAxis::GammaX, .. }));
    }
}
