//! Run records and their CSV / JSON-lines encodings.

use std::io::{Read, Write};

use holonoise::ensemble::{ComparisonReport, EnsembleResult, ExperimentConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Column order of the CSV output.
pub const CSV_HEADER: [&str; 12] = [
    "sigma_x",
    "gamma_x",
    "l_x",
    "n_real",
    "seed",
    "F_mc",
    "F_stderr",
    "F_analytic",
    "I_mc",
    "I_stderr",
    "I_analytic",
    "f_mc",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

/// Everything needed to replay one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    #[serde(flatten)]
    pub result: EnsembleResult,
    pub comparison: ComparisonReport,
    pub wall_time_s: f64,
}

impl RunRecord {
    pub fn new(config: ExperimentConfig, result: EnsembleResult, comparison: ComparisonReport, wall_time_s: f64) -> Self {
        Self {
            version: VERSION.to_string(),
            seed: config.seed,
            config,
            result,
            comparison,
            wall_time_s,
        }
    }

    pub fn csv_row(&self) -> CsvRow {
        let r = &self.result;
        CsvRow {
            sigma_x: self.config.ou_x.sigma(),
            gamma_x: self.config.ou_x.gamma(),
            l_x: self.config.l_x,
            n_real: r.n_used,
            seed: self.seed,
            f_mc: r.fidelity_mc,
            f_stderr: r.fidelity_stderr,
            f_analytic: r.prediction.fidelity,
            i_mc: r.purity_mc,
            i_stderr: r.purity_stderr,
            i_analytic: r.prediction.purity,
            f_amp: r.amplitude_fidelity_mc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub sigma_x: f64,
    pub gamma_x: f64,
    pub l_x: f64,
    pub n_real: usize,
    pub seed: u64,
    #[serde(rename = "F_mc")]
    pub f_mc: f64,
    #[serde(rename = "F_stderr")]
    pub f_stderr: f64,
    #[serde(rename = "F_analytic")]
    pub f_analytic: f64,
    #[serde(rename = "I_mc")]
    pub i_mc: f64,
    #[serde(rename = "I_stderr")]
    pub i_stderr: f64,
    #[serde(rename = "I_analytic")]
    pub i_analytic: f64,
    /// `√F_mc`
    #[serde(rename = "f_mc")]
    pub f_amp: f64,
}

pub fn write_records<W: Write>(out: W, records: &[RunRecord], format: Format) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for rec in records {
                w.serialize(rec.csv_row())?;
            }
            if records.is_empty() {
                w.write_record(CSV_HEADER)?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            let mut out = out;
            for rec in records {
                serde_json::to_writer(&mut out, rec)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(CliError::Config(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(CliError::from)).collect()
}

pub fn read_jsonl<R: Read>(input: R) -> Result<Vec<RunRecord>, CliError> {
    let mut text = String::new();
    let mut input = input;
    input.read_to_string(&mut text)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(CliError::from))
        .collect()
}
