//! Experiment flags, the flat key-value config file, and how they combine.
//!
//! Precedence, highest first: command-line flag, config file entry,
//! `HOLONOISE_SEED` (seed only), built-in default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use holonoise::ensemble::{ExperimentConfig, NoiseMode};
use holonoise::qmath::BasisLabel;
use holonoise::OUParams;

use crate::CliError;

pub const SEED_ENV: &str = "HOLONOISE_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Stochastic,
    Systematic,
}

/// Flags describing one experiment. All optional so that a config file can
/// fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentFlags {
    /// Flat `key = value` file using the flag names below (e.g. `gamma-x = 5`)
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// x-loop edge length l_x, in units of the displacement x; must exceed pi/4 [default: 1]
    #[arg(long)]
    pub lx: Option<f64>,
    /// y-loop edge length l_y, in units of the displacement y [default: 1]
    #[arg(long)]
    pub ly: Option<f64>,
    /// OU bandwidth (covariance decay rate) on the x loop, per unit x [default: 5]
    #[arg(long = "gamma-x")]
    pub gamma_x: Option<f64>,
    /// OU bandwidth on the y loop, per unit y [default: 5]
    #[arg(long = "gamma-y")]
    pub gamma_y: Option<f64>,
    /// OU variance of the squeezing error on the x loop (r1 units squared) [default: 1e-4]
    #[arg(long = "sigma-x")]
    pub sigma_x: Option<f64>,
    /// OU variance of the squeezing error on the y loop (r1 units squared) [default: 0]
    #[arg(long = "sigma-y")]
    pub sigma_y: Option<f64>,
    /// Number of noise realizations [default: 20000]
    #[arg(long)]
    pub n: Option<usize>,
    /// RNG seed; falls back to $HOLONOISE_SEED [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Noise grid spacing along the loop edge [default: min(0.01, 0.1/gamma) per plane]
    #[arg(long = "grid-dx")]
    pub grid_dx: Option<f64>,
    /// Input basis state |j>, 0 or 1 [default: 0]
    #[arg(long)]
    pub j: Option<u8>,
    /// Noise model [default: stochastic]
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Constant squeezing offset on the x loop in systematic mode (r1 units) [default: 0]
    #[arg(long = "offset-x")]
    pub offset_x: Option<f64>,
    /// Constant squeezing offset on the y loop in systematic mode (r1 units) [default: 0]
    #[arg(long = "offset-y")]
    pub offset_y: Option<f64>,
}

const KEYS: &[&str] = &[
    "lx", "ly", "gamma-x", "gamma-y", "sigma-x", "sigma-y", "n", "seed", "grid-dx", "j", "mode", "offset-x",
    "offset-y",
];

/// Parses `key = value` lines; `#` starts a comment. Keys may use `_` or `-`.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("config line {}: unknown key `{key}`", lineno + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value `{value}` for `{key}`")))
}

impl ExperimentFlags {
    /// Copies each entry of `file` into the flags that are still unset.
    fn fill_from(&mut self, file: &BTreeMap<String, String>) -> Result<(), CliError> {
        macro_rules! fill {
            ($field:ident, $key:literal) => {
                if self.$field.is_none() {
                    if let Some(v) = file.get($key) {
                        self.$field = Some(parse_value($key, v)?);
                    }
                }
            };
        }
        fill!(lx, "lx");
        fill!(ly, "ly");
        fill!(gamma_x, "gamma-x");
        fill!(gamma_y, "gamma-y");
        fill!(sigma_x, "sigma-x");
        fill!(sigma_y, "sigma-y");
        fill!(n, "n");
        fill!(seed, "seed");
        fill!(grid_dx, "grid-dx");
        fill!(j, "j");
        fill!(offset_x, "offset-x");
        fill!(offset_y, "offset-y");
        if self.mode.is_none() {
            if let Some(v) = file.get("mode") {
                self.mode = Some(
                    ModeArg::from_str(v, true)
                        .map_err(|_| CliError::Config(format!("invalid value `{v}` for `mode`")))?,
                );
            }
        }
        Ok(())
    }

    /// Resolves flags, config file, environment and defaults into a
    /// validated configuration.
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let env_seed = std::env::var(SEED_ENV).ok();
        self.resolve_with_env(env_seed.as_deref())
    }

    pub fn resolve_with_env(&self, env_seed: Option<&str>) -> Result<ExperimentConfig, CliError> {
        let mut flags = self.clone();
        if let Some(path) = &self.config {
            flags.fill_from(&read_config_file(path)?)?;
        }
        if flags.seed.is_none() {
            if let Some(s) = env_seed {
                flags.seed = Some(parse_value(SEED_ENV, s.trim())?);
            }
        }

        let defaults = ExperimentConfig::default();
        let ou = |sigma: Option<f64>, gamma: Option<f64>, fallback: &OUParams| {
            OUParams::new(sigma.unwrap_or(fallback.sigma()), gamma.unwrap_or(fallback.gamma()))
                .map_err(|e| CliError::Config(e.to_string()))
        };
        let input = match flags.j {
            None => defaults.input,
            Some(j) => BasisLabel::try_from(j).map_err(|e| CliError::Config(e.to_string()))?,
        };
        let mode = match flags.mode.unwrap_or(ModeArg::Stochastic) {
            ModeArg::Stochastic => {
                if flags.offset_x.is_some() || flags.offset_y.is_some() {
                    return Err(CliError::Config("--offset-x/--offset-y need --mode systematic".into()));
                }
                NoiseMode::Stochastic
            }
            ModeArg::Systematic => NoiseMode::Systematic {
                offset_x: flags.offset_x.unwrap_or(0.0),
                offset_y: flags.offset_y.unwrap_or(0.0),
            },
        };
        let config = ExperimentConfig {
            l_x: flags.lx.unwrap_or(defaults.l_x),
            l_y: flags.ly.unwrap_or(defaults.l_y),
            ou_x: ou(flags.sigma_x, flags.gamma_x, &defaults.ou_x)?,
            ou_y: ou(flags.sigma_y, flags.gamma_y, &defaults.ou_y)?,
            n_realizations: flags.n.unwrap_or(defaults.n_realizations),
            seed: flags.seed.unwrap_or(defaults.seed),
            grid_dx: flags.grid_dx,
            input,
            mode,
            diagonal_sign: defaults.diagonal_sign,
        };
        config.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(config)
    }
}
