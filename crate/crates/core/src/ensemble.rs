//! Monte Carlo averaging of output states over squeezing-noise realizations,
//! and the small-noise closed forms the averages are checked against.
//!
//! Each realization draws independent OU paths for the two loops from its
//! own RNG stream, so results do not depend on how work is scheduled.
//! Realizations are reduced in index order within fixed batches, and the
//! batch statistics give batch-means standard errors for `F` and `I`.

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gatelab::{realization_density, GateRealization};
use crate::loops::{perturbed_alpha, perturbed_beta, solve_dx, HadamardLoopPair, LoopError, MIN_LX_MARGIN};
use crate::ounoise::{
    decorrelation_excess, sample_ou, systematic_path, GridSpec, NoiseError, NoisePath, OUParams, PlaneTag,
    RngStream,
};
use crate::qmath::{fidelity, purity, BasisLabel, C2Matrix, DensityMatrix, QmathError};

/// Number of batches for batch-means error estimates.
pub const BATCHES: usize = 20;

/// Above this `σ̃_x` the small-noise predictions are extrapolations.
pub const SMALL_NOISE_LIMIT: f64 = 1e-2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error("averaged state is not a density matrix: {0}")]
    Numerical(#[from] QmathError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseMode {
    /// Fresh OU paths for every realization.
    Stochastic,
    /// The same constant offset in every realization.
    Systematic { offset_x: f64, offset_y: f64 },
}

/// Sign of the `2e^{-2d_x} l_x σ̃_x` shift of `⟨j|ρ_j|j⟩` in the averaged state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalSign {
    Plus,
    /// Matches the ensemble average: `⟨α⟩ = -2e^{-2d_x} l_x σ̃_x` to leading order.
    #[default]
    Minus,
}

impl DiagonalSign {
    fn value(self) -> f64 {
        match self {
            DiagonalSign::Plus => 1.0,
            DiagonalSign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub l_x: f64,
    pub l_y: f64,
    pub ou_x: OUParams,
    pub ou_y: OUParams,
    pub n_realizations: usize,
    pub seed: u64,
    /// Noise grid spacing; `None` uses each plane's [`OUParams::default_step`].
    pub grid_dx: Option<f64>,
    pub input: BasisLabel,
    pub mode: NoiseMode,
    #[serde(default)]
    pub diagonal_sign: DiagonalSign,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            l_x: 1.0,
            l_y: 1.0,
            ou_x: OUParams::new(1e-4, 5.0).unwrap(),
            ou_y: OUParams::new(0.0, 5.0).unwrap(),
            n_realizations: 20_000,
            seed: 42,
            grid_dx: None,
            input: BasisLabel::Zero,
            mode: NoiseMode::Stochastic,
            diagonal_sign: DiagonalSign::Minus,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        let min_lx = FRAC_PI_4 + MIN_LX_MARGIN;
        if !(self.l_x.is_finite() && self.l_x >= min_lx) {
            return Err(EnsembleError::Config(format!(
                "l_x = {} must exceed pi/4 (need l_x >= {min_lx}); the x-loop height \
                 d_x = -ln(1 - pi/(4 l_x))/2 diverges at pi/4",
                self.l_x
            )));
        }
        if !(self.l_y.is_finite() && self.l_y > 0.0) {
            return Err(EnsembleError::Config(format!("l_y = {} must be > 0", self.l_y)));
        }
        if self.n_realizations == 0 {
            return Err(EnsembleError::Config("n_realizations must be >= 1".into()));
        }
        if let Some(dx) = self.grid_dx {
            if !(dx.is_finite() && dx > 0.0) {
                return Err(EnsembleError::Config(format!("grid spacing {dx} must be > 0")));
            }
        }
        // Re-check in case the params were deserialized rather than built.
        OUParams::new(self.ou_x.sigma(), self.ou_x.gamma())?;
        OUParams::new(self.ou_y.sigma(), self.ou_y.gamma())?;
        if let NoiseMode::Systematic { offset_x, offset_y } = self.mode {
            if !(offset_x.is_finite() && offset_y.is_finite()) {
                return Err(EnsembleError::Config("systematic offsets must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn loops(&self) -> Result<HadamardLoopPair, EnsembleError> {
        Ok(HadamardLoopPair::from_lengths(self.l_x, self.l_y)?)
    }

    fn grid(&self, length: f64, ou: &OUParams) -> Result<GridSpec, EnsembleError> {
        let step = self.grid_dx.unwrap_or_else(|| ou.default_step());
        Ok(GridSpec::new(0.0, length, step)?)
    }

    /// `ρ₀ⱼ`, the output of the error-free gate.
    pub fn ideal_state(&self) -> DensityMatrix {
        realization_density(self.input, 0.0, 0.0)
    }
}

/// How realizations are scheduled. Results are identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Execution {
    Sequential,
    /// Rayon data parallelism; falls back to sequential without the
    /// `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// A validated configuration with loop geometry and grids resolved.
#[derive(Debug, Clone)]
pub struct Ensemble {
    config: ExperimentConfig,
    pair: HadamardLoopPair,
    grid_x: GridSpec,
    grid_y: GridSpec,
    /// Constant paths for systematic mode.
    fixed: Option<(NoisePath, NoisePath)>,
}

impl Ensemble {
    pub fn new(config: &ExperimentConfig) -> Result<Self, EnsembleError> {
        config.validate()?;
        let pair = config.loops()?;
        let grid_x = config.grid(config.l_x, &config.ou_x)?;
        let grid_y = config.grid(config.l_y, &config.ou_y)?;
        let fixed = match config.mode {
            NoiseMode::Stochastic => None,
            NoiseMode::Systematic { offset_x, offset_y } => Some((
                systematic_path(offset_x, &grid_x)?,
                systematic_path(offset_y, &grid_y)?,
            )),
        };
        Ok(Self {
            config: config.clone(),
            pair,
            grid_x,
            grid_y,
            fixed,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn loops(&self) -> &HadamardLoopPair {
        &self.pair
    }

    /// Noise paths of realization `index`.
    pub fn noise(&self, index: u64) -> Result<(NoisePath, NoisePath), EnsembleError> {
        if let Some((nx, ny)) = &self.fixed {
            return Ok((nx.clone(), ny.clone()));
        }
        let seed = self.config.seed;
        let nx = sample_ou(&self.config.ou_x, &self.grid_x, RngStream::new(seed, index, PlaneTag::X))?;
        let ny = sample_ou(&self.config.ou_y, &self.grid_y, RngStream::new(seed, index, PlaneTag::Y))?;
        Ok((nx, ny))
    }

    /// `(α, β)` of realization `index`.
    pub fn angles(&self, index: u64) -> Result<(f64, f64), EnsembleError> {
        let (nx, ny) = self.noise(index)?;
        let alpha = perturbed_alpha(&self.pair.loop_i, &nx)?;
        let beta = perturbed_beta(&self.pair.loop_ii, &ny)?;
        Ok((alpha, beta))
    }

    pub fn realization(&self, index: u64) -> Result<GateRealization, EnsembleError> {
        let (alpha, beta) = self.angles(index)?;
        Ok(GateRealization::from_angles(alpha, beta))
    }

    fn output_state(&self, index: u64) -> Result<C2Matrix, EnsembleError> {
        let (alpha, beta) = self.angles(index)?;
        Ok(*realization_density(self.config.input, alpha, beta).matrix())
    }

    /// Sum of output states over `start..end`, accumulated in index order.
    fn batch_sum(&self, start: u64, end: u64, exec: Execution) -> Result<C2Matrix, EnsembleError> {
        let states: Vec<C2Matrix> = match exec {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (start..end)
                    .into_par_iter()
                    .map(|i| self.output_state(i))
                    .collect::<Result<_, _>>()?
            }
            _ => (start..end).map(|i| self.output_state(i)).collect::<Result<_, _>>()?,
        };
        Ok(states.into_iter().fold(C2Matrix::zero(), |acc, m| acc + m))
    }

    pub fn run(&self, exec: Execution) -> Result<EnsembleResult, EnsembleError> {
        let n = self.config.n_realizations;
        let batches = BATCHES.min(n);
        let reference = self.config.ideal_state();

        let mut total = C2Matrix::zero();
        let mut batch_f = Vec::with_capacity(batches);
        let mut batch_i = Vec::with_capacity(batches);
        let mut start = 0u64;
        for b in 0..batches {
            let size = n / batches + usize::from(b < n % batches);
            let end = start + size as u64;
            let sum = self.batch_sum(start, end, exec)?;
            total = total + sum;
            let mean = DensityMatrix::new(sum.scale_real(1.0 / size as f64))?;
            batch_f.push(fidelity(&reference, &mean));
            batch_i.push(purity(&mean));
            start = end;
        }

        let rho_avg = DensityMatrix::new(total.scale_real(1.0 / n as f64))?;
        let f_mc = fidelity(&reference, &rho_avg);
        let i_mc = purity(&rho_avg);
        Ok(EnsembleResult {
            rho_avg,
            fidelity_mc: f_mc,
            fidelity_stderr: batch_stderr(&batch_f),
            purity_mc: i_mc,
            purity_stderr: batch_stderr(&batch_i),
            amplitude_fidelity_mc: f_mc.max(0.0).sqrt(),
            prediction: self.prediction()?,
            n_used: n,
        })
    }

    fn prediction(&self) -> Result<Prediction, EnsembleError> {
        let cfg = &self.config;
        Ok(match cfg.mode {
            NoiseMode::Stochastic => {
                let rho = analytic_rho(cfg, cfg.input)?;
                let f = analytic_fidelity(cfg)?;
                Prediction {
                    kind: PredictionKind::StochasticSmallNoise,
                    rho: rho.matrix,
                    fidelity: f,
                    purity: analytic_purity(f).exact,
                    extrapolated: rho.extrapolated,
                }
            }
            NoiseMode::Systematic { .. } => {
                // Every realization is the same pure state.
                let (alpha, beta) = self.angles(0)?;
                let rho = realization_density(cfg.input, alpha, beta);
                Prediction {
                    kind: PredictionKind::SystematicExact,
                    rho: *rho.matrix(),
                    fidelity: fidelity(&cfg.ideal_state(), &rho),
                    purity: 1.0,
                    extrapolated: false,
                }
            }
        })
    }
}

/// Standard error of the mean of batch statistics.
fn batch_stderr(values: &[f64]) -> f64 {
    let b = values.len();
    if b < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / b as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}

pub fn run_ensemble(config: &ExperimentConfig) -> Result<EnsembleResult, EnsembleError> {
    run_ensemble_with(config, Execution::default())
}

pub fn run_ensemble_with(config: &ExperimentConfig, exec: Execution) -> Result<EnsembleResult, EnsembleError> {
    Ensemble::new(config)?.run(exec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionKind {
    /// Leading-order closed forms for OU noise.
    StochasticSmallNoise,
    /// Exact single-state result for a constant offset.
    SystematicExact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub kind: PredictionKind,
    pub rho: C2Matrix,
    pub fidelity: f64,
    pub purity: f64,
    /// `σ̃_x` is beyond [`SMALL_NOISE_LIMIT`].
    pub extrapolated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub rho_avg: DensityMatrix,
    pub fidelity_mc: f64,
    pub fidelity_stderr: f64,
    pub purity_mc: f64,
    pub purity_stderr: f64,
    /// `f = √F`
    pub amplitude_fidelity_mc: f64,
    pub prediction: Prediction,
    pub n_used: usize,
}

/// Small-noise averaged state. Not necessarily positive outside the regime
/// where the leading-order expansion holds, hence a plain matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticRho {
    pub matrix: C2Matrix,
    pub extrapolated: bool,
}

/// `8σ̃_x/Γ_x · e^{-4d_x} · (l_x - (1 - e^{-Γ_x l_x})/Γ_x)`, the loss of
/// coherence `½ - (-1)^j ⟨j|ρ_j|nj⟩`.
fn coherence_loss(cfg: &ExperimentConfig) -> Result<f64, EnsembleError> {
    let dx = solve_dx(cfg.l_x)?;
    let (sigma, gamma) = (cfg.ou_x.sigma(), cfg.ou_x.gamma());
    let bracket = decorrelation_excess(gamma * cfg.l_x) / gamma;
    Ok(8.0 * sigma / gamma * (-4.0 * dx).exp() * bracket)
}

/// Leading-order noise-averaged output state for input `j`.
pub fn analytic_rho(cfg: &ExperimentConfig, j: BasisLabel) -> Result<AnalyticRho, EnsembleError> {
    use num_complex::Complex64 as C64;
    let dx = solve_dx(cfg.l_x)?;
    let shift = cfg.diagonal_sign.value() * 2.0 * (-2.0 * dx).exp() * cfg.l_x * cfg.ou_x.sigma();
    let coherence = j.sign() * (0.5 - coherence_loss(cfg)?);

    let mut m = C2Matrix::zero();
    let (jj, nj) = (j.index(), j.complement().index());
    m.entries[jj][jj] = C64::new(0.5 + shift, 0.0);
    m.entries[nj][nj] = C64::new(0.5 - shift, 0.0);
    m.entries[jj][nj] = C64::new(coherence, 0.0);
    m.entries[nj][jj] = C64::new(coherence, 0.0);
    Ok(AnalyticRho {
        matrix: m,
        extrapolated: cfg.ou_x.sigma() > SMALL_NOISE_LIMIT,
    })
}

/// Gate fidelity for OU squeezing noise on the x-loop:
/// `F = 1 - 4σ̃/(Γl) · (l√2 - π/(2√2))² · [1 - (1 - e^{-Γl})/(Γl)]`.
pub fn analytic_fidelity(cfg: &ExperimentConfig) -> Result<f64, EnsembleError> {
    let (l, sigma, gamma) = (cfg.l_x, cfg.ou_x.sigma(), cfg.ou_x.gamma());
    if l.is_nan() || l <= FRAC_PI_4 {
        return Err(LoopError::LxTooShort(l).into());
    }
    let gl = gamma * l;
    let geometric = (l * SQRT_2 - std::f64::consts::PI / (2.0 * SQRT_2)).powi(2);
    let bracket = decorrelation_excess(gl) / gl;
    Ok(1.0 - 4.0 * sigma / gl * geometric * bracket)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurityPrediction {
    /// `½ + ½(1 - 2F)²`
    pub exact: f64,
    /// `2F - 1`, valid for `1 - F ≪ 1`
    pub small_error: f64,
}

pub fn analytic_purity(f: f64) -> PurityPrediction {
    PurityPrediction {
        exact: 0.5 + 0.5 * (1.0 - 2.0 * f).powi(2),
        small_error: 2.0 * f - 1.0,
    }
}

/// Pass/fail thresholds for [`compare`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub max_z: f64,
    /// Slack on `|I - (2F - 1)|` in units of the combined standard error.
    pub small_error_z: f64,
    /// Coefficient of the `(1 - F)²` term allowed in `|I - (2F - 1)|`.
    pub second_order: f64,
    pub exact_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            max_z: 3.0,
            small_error_z: 3.0,
            second_order: 10.0,
            exact_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub kind: PredictionKind,
    /// `|F_mc - F_pred| / F_stderr`; `None` when the stochastic formulas do not apply.
    pub fidelity_z: Option<f64>,
    pub purity_z: Option<f64>,
    /// `|I_mc - (2F_mc - 1)|`
    pub small_error_residual: f64,
    pub small_error_bound: f64,
    /// `|I_mc - 1|`
    pub purity_residual_vs_one: f64,
    pub stochastic_formulas_applicable: bool,
    pub extrapolated: bool,
    pub passed: bool,
}

fn z_score(diff: f64, stderr: f64, exact_tol: f64) -> f64 {
    if stderr > 0.0 {
        diff.abs() / stderr
    } else if diff.abs() <= exact_tol {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn compare(result: &EnsembleResult) -> ComparisonReport {
    compare_with(result, &Thresholds::default())
}

pub fn compare_with(result: &EnsembleResult, t: &Thresholds) -> ComparisonReport {
    let f = result.fidelity_mc;
    let i = result.purity_mc;
    let small_error_residual = (i - (2.0 * f - 1.0)).abs();
    let small_error_bound = t.small_error_z * (result.purity_stderr + 2.0 * result.fidelity_stderr)
        + t.second_order * (1.0 - f).powi(2)
        + t.exact_tol;
    let purity_residual_vs_one = (i - 1.0).abs();
    let pred = &result.prediction;

    match pred.kind {
        PredictionKind::StochasticSmallNoise => {
            let fz = z_score(f - pred.fidelity, result.fidelity_stderr, t.exact_tol);
            let iz = z_score(i - pred.purity, result.purity_stderr, t.exact_tol);
            let passed = fz <= t.max_z && iz <= t.max_z && small_error_residual <= small_error_bound;
            ComparisonReport {
                kind: pred.kind,
                fidelity_z: Some(fz),
                purity_z: Some(iz),
                small_error_residual,
                small_error_bound,
                purity_residual_vs_one,
                stochastic_formulas_applicable: true,
                extrapolated: pred.extrapolated,
                passed,
            }
        }
        PredictionKind::SystematicExact => {
            let passed = purity_residual_vs_one <= t.exact_tol && (f - pred.fidelity).abs() <= t.exact_tol;
            ComparisonReport {
                kind: pred.kind,
                fidelity_z: None,
                purity_z: None,
                small_error_residual,
                small_error_bound,
                purity_residual_vs_one,
                stochastic_formulas_applicable: false,
                extrapolated: false,
                passed,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::ounoise::covariance_double_integral;

    fn config(sigma: f64, n: usize) -> ExperimentConfig {
        ExperimentConfig {
            ou_x: OUParams::new(sigma, 5.0).unwrap(),
            n_realizations: n,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn validation() {
        let mut c = config(1e-4, 10);
        c.l_x = FRAC_PI_4 + 1e-7;
        assert!(matches!(Ensemble::new(&c), Err(EnsembleError::Config(msg)) if msg.contains("pi/4")));
        let mut c = config(1e-4, 0);
        assert!(c.validate().is_err());
        c.n_realizations = 1;
        c.grid_dx = Some(0.0);
        assert!(c.validate().is_err());
        c.grid_dx = None;
        c.l_y = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_noise_is_exact() {
        for j in [BasisLabel::Zero, BasisLabel::One] {
            let mut c = config(0.0, 57);
            c.input = j;
            let r = run_ensemble(&c).unwrap();
            assert_eq!(r.rho_avg, c.ideal_state());
            assert_eq!(r.fidelity_mc, 1.0);
            assert_eq!(r.purity_mc, 1.0);
            assert_eq!(r.prediction.fidelity, 1.0);
            let rep = compare(&r);
            assert_eq!(rep.fidelity_z, Some(0.0));
            assert_eq!(rep.small_error_residual, 0.0);
            assert!(rep.passed);
        }
    }

    #[test]
    fn analytic_rho_reduces_to_ideal() {
        for j in [BasisLabel::Zero, BasisLabel::One] {
            let rho = analytic_rho(&config(0.0, 1), j).unwrap();
            assert!(rho.matrix.max_abs_diff(realization_density(j, 0.0, 0.0).matrix()) < 1e-16);
        }
        let rho = analytic_rho(&config(3e-3, 1), BasisLabel::One).unwrap();
        assert_relative_eq!(rho.matrix.trace().re, 1.0, max_relative = 1e-15);
        assert!(!rho.extrapolated);
        assert!(analytic_rho(&config(0.02, 1), BasisLabel::One).unwrap().extrapolated);
    }

    #[test]
    fn analytic_rho_coherence_is_alpha_variance() {
        // Coherence ½cos2α ≈ ½ - α², and ⟨α²⟩ ≈ 4e^{-4d_x} ∬ cov.
        let c = config(2e-4, 1);
        let dx = solve_dx(c.l_x).unwrap();
        let rho = analytic_rho(&c, BasisLabel::Zero).unwrap();
        let dev = 0.5 - rho.matrix.get(0, 1).re;
        let expected = covariance_double_integral(&c.ou_x, c.l_x).unwrap() * 4.0 * (-4.0 * dx).exp();
        assert_relative_eq!(dev, expected, max_relative = 1e-12);
    }

    #[test]
    fn analytic_fidelity_examples() {
        assert_eq!(analytic_fidelity(&config(0.0, 1)).unwrap(), 1.0);
        // Direct evaluation of the closed form in double precision (numpy).
        let f = analytic_fidelity(&config(1e-4, 1)).unwrap();
        assert_relative_eq!(1.0 - f, 5.904_835_268_966e-6, max_relative = 1e-9);
        // Same number through 8σ̃/Γ e^{-4d_x}(l - (1 - e^{-Γl})/Γ).
        assert_relative_eq!(1.0 - f, coherence_loss(&config(1e-4, 1)).unwrap(), max_relative = 1e-9);
        for j in [BasisLabel::Zero, BasisLabel::One] {
            let c = ExperimentConfig { input: j, ..config(7e-4, 1) };
            let rho = analytic_rho(&c, j).unwrap();
            let off_dev = rho.matrix.get(j.index(), j.complement().index()).re - 0.5 * j.sign();
            let f = analytic_fidelity(&c).unwrap();
            // F = ½ + (-1)^j Re⟨j|ρ|nj⟩, so 1 - F = -(-1)^j · deviation.
            assert_relative_eq!(1.0 - f, -j.sign() * off_dev, max_relative = 1e-9);
        }
    }

    #[test]
    fn fidelity_decays_with_correlation_time_only() {
        // Fixed σ̃: 1 - F → 0 as (Γ l)⁻¹ → 0.
        let mut prev = f64::INFINITY;
        for gamma in [0.1, 1.0, 10.0, 100.0, 1e4, 1e6] {
            let c = ExperimentConfig { ou_x: OUParams::new(1e-3, gamma).unwrap(), ..config(0.0, 1) };
            let loss = 1.0 - analytic_fidelity(&c).unwrap();
            assert!(loss > 0.0 && loss < prev);
            prev = loss;
        }
        assert!(prev < 1e-8);
    }

    #[test]
    fn analytic_purity_examples() {
        assert_eq!(analytic_purity(1.0), PurityPrediction { exact: 1.0, small_error: 1.0 });
        let p = analytic_purity(0.9);
        assert_relative_eq!(p.exact, 0.82, max_relative = 1e-14);
        assert_relative_eq!(p.small_error, 0.8, max_relative = 1e-14);
        assert_eq!(analytic_purity(0.5), PurityPrediction { exact: 0.5, small_error: 0.0 });
    }

    #[test]
    fn purity_formula_matches_analytic_state() {
        for sigma in [1e-5, 1e-4, 1e-3] {
            let c = config(sigma, 1);
            let f = analytic_fidelity(&c).unwrap();
            let m = analytic_rho(&c, BasisLabel::Zero).unwrap().matrix;
            let direct = (m * m).trace().re;
            // The diagonal shift enters the purity as 2·shift², which is not
            // small relative to (1 - F)² here.
            let shift = m.get(0, 0).re - 0.5;
            let bound = 2.0 * shift * shift + 10.0 * (1.0 - f).powi(2);
            assert!((analytic_purity(f).exact - direct).abs() <= bound);
        }
    }

    #[test]
    fn small_runs_and_stderr() {
        let r = run_ensemble(&config(1e-3, 1)).unwrap();
        assert_eq!(r.n_used, 1);
        assert_eq!(r.fidelity_stderr, 0.0);
        let r = run_ensemble(&config(1e-3, 23)).unwrap();
        assert!(r.fidelity_stderr > 0.0);
        assert!(r.purity_mc <= 1.0 + 1e-15);
        assert!(r.purity_mc >= 2.0 * r.fidelity_mc - 1.0 - 5.0 * (r.fidelity_stderr + r.purity_stderr));
    }

    #[test]
    fn systematic_mode_prediction() {
        let c = ExperimentConfig {
            mode: NoiseMode::Systematic { offset_x: 0.05, offset_y: 0.0 },
            ..config(1e-4, 40)
        };
        let r = run_ensemble(&c).unwrap();
        assert!((r.purity_mc - 1.0).abs() < 1e-12);
        assert!(r.fidelity_mc < 1.0);
        let rep = compare(&r);
        assert!(!rep.stochastic_formulas_applicable);
        assert_eq!(rep.fidelity_z, None);
        assert!(rep.purity_residual_vs_one <= 1e-12);
        assert!(rep.passed);
    }

    #[test]
    fn batch_stderr_known_values() {
        assert_eq!(batch_stderr(&[1.0]), 0.0);
        // sd of {1,2,3,4} = sqrt(5/3); divided by 2
        assert_relative_eq!(batch_stderr(&[1.0, 2.0, 3.0, 4.0]), (5.0f64 / 3.0).sqrt() / 2.0);
    }
}
