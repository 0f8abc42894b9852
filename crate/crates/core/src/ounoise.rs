//! Stationary Ornstein-Uhlenbeck noise along a control coordinate.
//!
//! The process is indexed by the transverse loop coordinate (x or y), with
//! covariance `⟨δr(u) δr(u')⟩ = σ̃ e^{-Γ|u-u'|}`; `σ̃` is the variance itself.
//! Paths are drawn with the exact one-step transition, so the grid spacing
//! only affects quadrature, never the marginal law.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("OU variance must be finite and >= 0, got {0}")]
    BadVariance(f64),
    #[error("OU bandwidth must be finite and > 0, got {0}")]
    BadBandwidth(f64),
    #[error("invalid grid: start {start}, end {end}, step {step}")]
    BadGrid { start: f64, end: f64, step: f64 },
    #[error("integration length must be > 0, got {0}")]
    BadLength(f64),
}

/// Variance `σ̃` and bandwidth (covariance decay rate) `Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OUParams {
    sigma: f64,
    gamma: f64,
}

impl OUParams {
    pub fn new(sigma: f64, gamma: f64) -> Result<Self, NoiseError> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(NoiseError::BadVariance(sigma));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(NoiseError::BadBandwidth(gamma));
        }
        Ok(Self { sigma, gamma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Spacing that puts at least 10 samples per correlation length.
    pub fn default_step(&self) -> f64 {
        (0.1 / self.gamma).min(0.01)
    }
}

/// Uniform grid over `[start, end]` with spacing at most `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(start: f64, end: f64, step: f64) -> Result<Self, NoiseError> {
        let spec = Self { start, end, step };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), NoiseError> {
        let ok = self.start.is_finite()
            && self.end.is_finite()
            && self.step.is_finite()
            && self.step > 0.0
            && self.end > self.start;
        if ok {
            Ok(())
        } else {
            Err(NoiseError::BadGrid {
                start: self.start,
                end: self.end,
                step: self.step,
            })
        }
    }

    /// Number of intervals; the actual spacing is `(end - start) / intervals`.
    pub fn intervals(&self) -> usize {
        let raw = (self.end - self.start) / self.step;
        // Absorb rounding so that e.g. 1.0 / 0.01 gives 100, not 101.
        ((raw - 1e-9).ceil() as usize).max(1)
    }

    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / self.intervals() as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.intervals();
        let width = self.end - self.start;
        (0..=n)
            .map(|k| {
                if k == n {
                    self.end
                } else {
                    self.start + width * (k as f64 / n as f64)
                }
            })
            .collect()
    }
}

/// A sampled realization `δr(u_k)` on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisePath {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl NoisePath {
    /// Builds a path from raw samples. Panics if lengths differ or there are
    /// fewer than two points; uniformity is the caller's responsibility.
    pub fn from_samples(grid: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(grid.len(), values.len(), "grid/value length mismatch");
        assert!(grid.len() >= 2, "a noise path needs at least two samples");
        Self { grid, values }
    }

    pub fn zero(spec: &GridSpec) -> Result<Self, NoiseError> {
        systematic_path(0.0, spec)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.grid[0]
    }

    pub fn end(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    pub fn spacing(&self) -> f64 {
        (self.end() - self.start()) / (self.len() - 1) as f64
    }

    /// Trapezoidal integral of `f(δr)` over the grid.
    pub fn trapezoid<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let h = self.spacing();
        let n = self.values.len();
        let inner: f64 = self.values[1..n - 1].iter().map(|&v| f(v)).sum();
        h * (inner + 0.5 * (f(self.values[0]) + f(self.values[n - 1])))
    }
}

/// Which loop plane a noise stream feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlaneTag {
    X = 0,
    Y = 1,
}

/// Identifies an independent random stream: one per (realization, plane).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub realization: u64,
    pub plane: PlaneTag,
}

impl RngStream {
    pub fn new(seed: u64, realization: u64, plane: PlaneTag) -> Self {
        Self {
            seed,
            realization,
            plane,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((self.realization << 1) | self.plane as u64);
        rng
    }
}

/// Draws a stationary OU path on `grid` using the exact transition
/// `δr_{k+1} = e^{-ΓΔ} δr_k + √(σ̃(1 - e^{-2ΓΔ})) ξ_k`.
pub fn sample_ou(params: &OUParams, grid: &GridSpec, stream: RngStream) -> Result<NoisePath, NoiseError> {
    grid.validate()?;
    let points = grid.points();
    if params.sigma == 0.0 {
        let zeros = vec![0.0; points.len()];
        return Ok(NoisePath::from_samples(points, zeros));
    }
    let mut rng = stream.rng();
    let decay = (-params.gamma * grid.spacing()).exp();
    // 1 - e^{-2ΓΔ} without cancellation for small ΓΔ
    let innovation = (params.sigma * -(-2.0 * params.gamma * grid.spacing()).exp_m1()).sqrt();

    let mut values = Vec::with_capacity(points.len());
    let first: f64 = StandardNormal.sample(&mut rng);
    let mut current = params.sigma.sqrt() * first;
    values.push(current);
    for _ in 1..points.len() {
        let xi: f64 = StandardNormal.sample(&mut rng);
        current = decay * current + innovation * xi;
        values.push(current);
    }
    Ok(NoisePath::from_samples(points, values))
}

/// Constant path `δr ≡ offset`: the same error on every run.
pub fn systematic_path(offset: f64, grid: &GridSpec) -> Result<NoisePath, NoiseError> {
    grid.validate()?;
    let points = grid.points();
    let values = vec![offset; points.len()];
    Ok(NoisePath::from_samples(points, values))
}

pub fn autocovariance(params: &OUParams, lag: f64) -> f64 {
    params.sigma * (-params.gamma * lag.abs()).exp()
}

/// `x - (1 - e^{-x})`, accurate for small `x`.
pub(crate) fn decorrelation_excess(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        // x²/2 - x³/6 + x⁴/24 - x⁵/120
        let x2 = x * x;
        x2 * (0.5 - x / 6.0 + x2 / 24.0 - x2 * x / 120.0)
    } else {
        x + (-x).exp_m1()
    }
}

/// `∫₀ˡ∫₀ˡ σ̃ e^{-Γ|u-u'|} du du' = (2σ̃/Γ)(l - (1 - e^{-Γl})/Γ)`.
pub fn covariance_double_integral(params: &OUParams, l: f64) -> Result<f64, NoiseError> {
    if !(l.is_finite() && l > 0.0) {
        return Err(NoiseError::BadLength(l));
    }
    let g = params.gamma;
    Ok(2.0 * params.sigma / (g * g) * decorrelation_excess(g * l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(start: f64, end: f64, step: f64) -> GridSpec {
        GridSpec::new(start, end, step).unwrap()
    }

    #[test]
    fn grid_spacing_is_uniform() {
        let g = grid(0.0, 1.0, 0.01);
        assert_eq!(g.intervals(), 100);
        let pts = g.points();
        assert_eq!(pts.len(), 101);
        assert_eq!(*pts.last().unwrap(), 1.0);
        for w in pts.windows(2) {
            assert!((w[1] - w[0] - 0.01).abs() < 1e-12);
        }
        // Non-dividing step rounds the spacing down.
        let g = grid(0.0, 1.0, 0.3);
        assert_eq!(g.intervals(), 4);
        assert_relative_eq!(g.spacing(), 0.25);
    }

    #[test]
    fn invalid_inputs() {
        assert!(GridSpec::new(1.0, 0.0, 0.1).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0.0).is_err());
        assert!(OUParams::new(-1.0, 1.0).is_err());
        assert!(OUParams::new(1.0, 0.0).is_err());
        let p = OUParams::new(1.0, 1.0).unwrap();
        assert_eq!(covariance_double_integral(&p, 0.0), Err(NoiseError::BadLength(0.0)));
    }

    #[test]
    fn zero_variance_path_is_zero() {
        let p = OUParams::new(0.0, 2.0).unwrap();
        let path = sample_ou(&p, &grid(0.0, 1.0, 0.01), RngStream::new(1, 0, PlaneTag::X)).unwrap();
        assert!(path.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn streams_reproduce_and_differ() {
        let p = OUParams::new(0.3, 2.0).unwrap();
        let g = grid(0.0, 1.0, 0.05);
        let a = sample_ou(&p, &g, RngStream::new(7, 3, PlaneTag::X)).unwrap();
        let b = sample_ou(&p, &g, RngStream::new(7, 3, PlaneTag::X)).unwrap();
        let c = sample_ou(&p, &g, RngStream::new(7, 3, PlaneTag::Y)).unwrap();
        let d = sample_ou(&p, &g, RngStream::new(7, 4, PlaneTag::X)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values(), c.values());
        assert_ne!(a.values(), d.values());
    }

    #[test]
    fn autocovariance_examples() {
        let p = OUParams::new(0.2, 4.0).unwrap();
        assert_eq!(autocovariance(&p, 0.0), 0.2);
        assert_eq!(autocovariance(&p, 1e6), 0.0);
        assert_relative_eq!(autocovariance(&p, 0.25), 0.2 / std::f64::consts::E, max_relative = 1e-15);
        assert_eq!(autocovariance(&p, -0.25), autocovariance(&p, 0.25));
    }

    #[test]
    fn double_integral_examples() {
        let p = OUParams::new(1.0, 1.0).unwrap();
        // 2D adaptive quadrature (scipy dblquad) gives 0.73575888..., i.e. 2/e.
        assert_relative_eq!(
            covariance_double_integral(&p, 1.0).unwrap(),
            2.0 / std::f64::consts::E,
            max_relative = 1e-8
        );
        // Γl ≪ 1: fully correlated, σ̃l²
        let p = OUParams::new(0.3, 1e-6).unwrap();
        assert_relative_eq!(covariance_double_integral(&p, 2.0).unwrap(), 0.3 * 4.0, max_relative = 1e-5);
        // Γl ≫ 1: 2σ̃l/Γ
        let p = OUParams::new(0.3, 1e4).unwrap();
        assert_relative_eq!(
            covariance_double_integral(&p, 2.0).unwrap(),
            2.0 * 0.3 * 2.0 / 1e4,
            max_relative = 1e-3
        );
    }

    #[test]
    fn decorrelation_excess_branches_agree() {
        for x in [9.9e-4f64, 1.01e-3] {
            let series = {
                let x2 = x * x;
                x2 * (0.5 - x / 6.0 + x2 / 24.0 - x2 * x / 120.0)
            };
            assert_relative_eq!(series, x + (-x).exp_m1(), max_relative = 1e-9);
        }
    }

    #[test]
    fn systematic_path_is_constant() {
        let g = grid(-0.5, 0.5, 0.1);
        let path = systematic_path(0.05, &g).unwrap();
        assert!(path.values().iter().all(|&v| v == 0.05));
        assert_eq!(path.start(), -0.5);
        assert_eq!(path.end(), 0.5);
    }

    #[test]
    fn trapezoid_on_linear_function_is_exact() {
        let g = grid(0.0, 2.0, 0.1);
        let values: Vec<f64> = g.points().iter().map(|x| 3.0 * x).collect();
        let path = NoisePath::from_samples(g.points(), values);
        assert_relative_eq!(path.trapezoid(|v| v), 6.0, max_relative = 1e-14);
    }
}
