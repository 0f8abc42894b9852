//! One-dimensional parameter sweeps over a base configuration.

use clap::ValueEnum;
use holonoise::ensemble::ExperimentConfig;
use holonoise::OUParams;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SweepAxis {
    SigmaX,
    GammaX,
    #[value(name = "l_x")]
    LX,
    NRealizations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub base: ExperimentConfig,
}

/// Comma-separated list, e.g. `0,1e-5,1e-4`.
pub fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("invalid sweep value `{s}`")))
        })
        .collect()
}

/// `count` points from `start` to `stop` inclusive.
pub fn range_values(start: f64, stop: f64, count: usize, spacing: Spacing) -> Result<Vec<f64>, CliError> {
    if count == 0 {
        return Err(CliError::Usage("sweep range needs count >= 1".into()));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let t = |k: usize| k as f64 / (count - 1) as f64;
    match spacing {
        Spacing::Linear => Ok((0..count).map(|k| start + (stop - start) * t(k)).collect()),
        Spacing::Log => {
            if !(start > 0.0 && stop > 0.0) {
                return Err(CliError::Usage("log sweep needs positive endpoints".into()));
            }
            let (a, b) = (start.ln(), stop.ln());
            Ok((0..count).map(|k| (a + (b - a) * t(k)).exp()).collect())
        }
    }
}

impl SweepSpec {
    pub fn new(axis: SweepAxis, values: Vec<f64>, base: ExperimentConfig) -> Result<Self, CliError> {
        if values.is_empty() {
            return Err(CliError::Usage("sweep needs at least one value".into()));
        }
        Ok(Self { axis, values, base })
    }

    fn point(&self, value: f64) -> Result<ExperimentConfig, String> {
        let mut cfg = self.base.clone();
        match self.axis {
            SweepAxis::SigmaX => {
                cfg.ou_x = OUParams::new(value, cfg.ou_x.gamma()).map_err(|e| e.to_string())?;
            }
            SweepAxis::GammaX => {
                cfg.ou_x = OUParams::new(cfg.ou_x.sigma(), value).map_err(|e| e.to_string())?;
            }
            SweepAxis::LX => cfg.l_x = value,
            SweepAxis::NRealizations => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= usize::MAX as f64) {
                    return Err(format!("n_realizations must be a positive integer, got {value}"));
                }
                cfg.n_realizations = value as usize;
            }
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    /// One validated configuration per value; fails on the first invalid one.
    pub fn configs(&self) -> Result<Vec<ExperimentConfig>, CliError> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                self.point(v)
                    .map_err(|msg| CliError::Config(format!("sweep point {i} ({v}): {msg}")))
            })
            .collect()
    }
}
