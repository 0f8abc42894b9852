//! Rectangular control loops in the `(x, r₁)` and `(y, r₁)` planes at `θ₁ = 0`.
//!
//! Each loop has one edge on `r₁ = 0` and a top edge at height `d`. The
//! enclosed "area" is the curvature-weighted surface integral
//! `Σ_I = ∫∫ 2e^{-2r₁} dx dr₁` or `Σ_II = ∫∫ 2e^{2r₁} dy dr₁`, and the
//! Hadamard gate needs `Σ_I = π/4`, `Σ_II = π/2`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ounoise::NoisePath;

/// Lengths this close to π/4 give a top edge too high to evaluate reliably.
pub const MIN_LX_MARGIN: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoopError {
    #[error("l_x = {0} must exceed pi/4 (d_x = -ln(1 - pi/(4 l_x))/2 is undefined otherwise)")]
    LxTooShort(f64),
    #[error("l_y = {0} must be > 0")]
    LyNonPositive(f64),
    #[error("invalid rectangle: a = {a}, b = {b}, d = {d}")]
    BadRectangle { a: f64, b: f64, d: f64 },
    #[error("noise grid [{grid_start}, {grid_end}] does not span loop edge [{a}, {b}]")]
    GridMismatch {
        grid_start: f64,
        grid_end: f64,
        a: f64,
        b: f64,
    },
    #[error("loop lies in the {found:?} plane, expected {expected:?}")]
    WrongPlane { expected: Plane, found: Plane },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Plane {
    /// `(x, r₁)`, loop C_I
    XPlane,
    /// `(y, r₁)`, loop C_II
    YPlane,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    /// Counterclockwise in the plane, starting at `(a, 0)`.
    Positive,
    Negative,
}

impl Orientation {
    pub fn reversed(self) -> Self {
        match self {
            Orientation::Positive => Orientation::Negative,
            Orientation::Negative => Orientation::Positive,
        }
    }
}

/// A point of the control manifold: displacement `η = x + iy`,
/// squeezing `ν = r₁ e^{iθ₁}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlPoint {
    pub x: f64,
    pub y: f64,
    pub r1: f64,
    pub theta1: f64,
}

impl ControlPoint {
    /// Point in `plane` at transverse coordinate `u` and height `r1`.
    pub fn in_plane(plane: Plane, u: f64, r1: f64) -> Self {
        match plane {
            Plane::XPlane => Self { x: u, r1, ..Self::default() },
            Plane::YPlane => Self { y: u, r1, ..Self::default() },
        }
    }

    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        Self {
            x: self.x + t * (other.x - self.x),
            y: self.y + t * (other.y - self.y),
            r1: self.r1 + t * (other.r1 - self.r1),
            theta1: self.theta1 + t * (other.theta1 - self.theta1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectLoop {
    pub plane: Plane,
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub orientation: Orientation,
}

impl RectLoop {
    pub fn new(plane: Plane, a: f64, b: f64, d: f64) -> Result<Self, LoopError> {
        if !(a.is_finite() && b.is_finite() && d.is_finite() && b > a && d >= 0.0) {
            return Err(LoopError::BadRectangle { a, b, d });
        }
        Ok(Self {
            plane,
            a,
            b,
            d,
            orientation: Orientation::Positive,
        })
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    fn expect_plane(&self, plane: Plane) -> Result<(), LoopError> {
        if self.plane == plane {
            Ok(())
        } else {
            Err(LoopError::WrongPlane {
                expected: plane,
                found: self.plane,
            })
        }
    }

    /// Checks that `noise` is sampled from `a` to `b`.
    pub fn check_grid(&self, noise: &NoisePath) -> Result<(), LoopError> {
        let tol = 1e-9 * self.a.abs().max(self.b.abs()).max(1.0);
        if (noise.start() - self.a).abs() > tol || (noise.end() - self.b).abs() > tol {
            return Err(LoopError::GridMismatch {
                grid_start: noise.start(),
                grid_end: noise.end(),
                a: self.a,
                b: self.b,
            });
        }
        Ok(())
    }
}

/// `d_x = -½ ln(1 - π/(4 l_x))`, the top-edge height giving `Σ_I = π/4`.
pub fn solve_dx(l_x: f64) -> Result<f64, LoopError> {
    if !(l_x.is_finite() && l_x > FRAC_PI_4) {
        return Err(LoopError::LxTooShort(l_x));
    }
    Ok(-0.5 * (-FRAC_PI_4 / l_x).ln_1p())
}

/// `d_y = ½ ln(1 + π/(2 l_y))`, the top-edge height giving `Σ_II = π/2`.
pub fn solve_dy(l_y: f64) -> Result<f64, LoopError> {
    if !(l_y.is_finite() && l_y > 0.0) {
        return Err(LoopError::LyNonPositive(l_y));
    }
    Ok(0.5 * (FRAC_PI_2 / l_y).ln_1p())
}

/// Closed-form surface integral enclosed by the rectangle.
pub fn area_sigma(lp: &RectLoop) -> f64 {
    let l = lp.length();
    match lp.plane {
        Plane::XPlane => -l * (-2.0 * lp.d).exp_m1(),
        Plane::YPlane => l * (2.0 * lp.d).exp_m1(),
    }
}

/// `α = e^{-2d_x} ∫ (1 - e^{-2δr_x}) dx`, trapezoid on the noise grid.
pub fn perturbed_alpha(loop_i: &RectLoop, noise: &NoisePath) -> Result<f64, LoopError> {
    loop_i.expect_plane(Plane::XPlane)?;
    loop_i.check_grid(noise)?;
    let integral = noise.trapezoid(|dr| -(-2.0 * dr).exp_m1());
    Ok((-2.0 * loop_i.d).exp() * integral)
}

/// `β = e^{2d_y} ∫ (e^{2δr_y} - 1) dy`, trapezoid on the noise grid.
pub fn perturbed_beta(loop_ii: &RectLoop, noise: &NoisePath) -> Result<f64, LoopError> {
    loop_ii.expect_plane(Plane::YPlane)?;
    loop_ii.check_grid(noise)?;
    let integral = noise.trapezoid(|dr| (2.0 * dr).exp_m1());
    Ok((2.0 * loop_ii.d).exp() * integral)
}

/// The two loops whose holonomies compose to `-iH₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HadamardLoopPair {
    pub loop_i: RectLoop,
    pub loop_ii: RectLoop,
}

impl HadamardLoopPair {
    /// Loops of lengths `l_x`, `l_y` starting at `a_x`, `a_y`, with heights
    /// solved so the areas are π/4 and π/2.
    pub fn new(a_x: f64, l_x: f64, a_y: f64, l_y: f64) -> Result<Self, LoopError> {
        let dx = solve_dx(l_x)?;
        let dy = solve_dy(l_y)?;
        Ok(Self {
            loop_i: RectLoop::new(Plane::XPlane, a_x, a_x + l_x, dx)?,
            loop_ii: RectLoop::new(Plane::YPlane, a_y, a_y + l_y, dy)?,
        })
    }

    pub fn from_lengths(l_x: f64, l_y: f64) -> Result<Self, LoopError> {
        Self::new(0.0, l_x, 0.0, l_y)
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.loop_i.orientation = orientation;
        self.loop_ii.orientation = orientation;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ounoise::{systematic_path, GridSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid_for(lp: &RectLoop, step: f64) -> GridSpec {
        GridSpec::new(lp.a, lp.b, step).unwrap()
    }

    #[test]
    fn solve_dx_examples() {
        // -0.5 * ln(1 - pi/4) evaluated in extended precision.
        assert_relative_eq!(solve_dx(1.0).unwrap(), 0.769_485_445_281_183_5, max_relative = 1e-14);
        let mut prev = f64::INFINITY;
        for l in [1.0, 2.0, 10.0, 100.0, 1e4, 1e8] {
            let d = solve_dx(l).unwrap();
            assert!(d > 0.0 && d < prev);
            prev = d;
        }
        assert!(prev < 1e-8);
        assert_eq!(solve_dx(FRAC_PI_4), Err(LoopError::LxTooShort(FRAC_PI_4)));
        assert!(solve_dx(0.5).is_err());
        assert!(solve_dx(f64::NAN).is_err());
    }

    #[test]
    fn solve_dy_examples() {
        assert_relative_eq!(solve_dy(1.0).unwrap(), 0.472_107_852_848_027_7, max_relative = 1e-14);
        let mut prev = f64::INFINITY;
        for l in [1.0, 10.0, 1e4, 1e8] {
            let d = solve_dy(l).unwrap();
            assert!(d > 0.0 && d < prev);
            prev = d;
        }
        assert!(solve_dy(0.0).is_err());
        assert!(solve_dy(-1.0).is_err());
    }

    #[test]
    fn area_examples() {
        let lp = RectLoop::new(Plane::XPlane, 0.0, 1.0, solve_dx(1.0).unwrap()).unwrap();
        assert_relative_eq!(area_sigma(&lp), FRAC_PI_4, max_relative = 1e-15);
        let lp = RectLoop::new(Plane::YPlane, 0.0, 1.0, solve_dy(1.0).unwrap()).unwrap();
        assert_relative_eq!(area_sigma(&lp), FRAC_PI_2, max_relative = 1e-15);
        let flat = RectLoop::new(Plane::XPlane, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(area_sigma(&flat), 0.0);
    }

    #[test]
    fn rectangle_validation() {
        assert!(RectLoop::new(Plane::XPlane, 1.0, 1.0, 0.1).is_err());
        assert!(RectLoop::new(Plane::XPlane, 0.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn alpha_beta_constant_noise() {
        let pair = HadamardLoopPair::from_lengths(1.3, 0.7).unwrap();
        let (li, lii) = (pair.loop_i, pair.loop_ii);
        let zero = systematic_path(0.0, &grid_for(&li, 0.01)).unwrap();
        assert_eq!(perturbed_alpha(&li, &zero).unwrap(), 0.0);
        let zero = systematic_path(0.0, &grid_for(&lii, 0.01)).unwrap();
        assert_eq!(perturbed_beta(&lii, &zero).unwrap(), 0.0);

        let c = 0.037;
        let path = systematic_path(c, &grid_for(&li, 0.01)).unwrap();
        let expected = (-2.0 * li.d).exp() * 1.3 * (1.0 - (-2.0 * c).exp());
        assert_relative_eq!(perturbed_alpha(&li, &path).unwrap(), expected, max_relative = 1e-13);

        let path = systematic_path(c, &grid_for(&lii, 0.01)).unwrap();
        let expected = (2.0 * lii.d).exp() * 0.7 * ((2.0 * c).exp() - 1.0);
        let beta = perturbed_beta(&lii, &path).unwrap();
        assert_relative_eq!(beta, expected, max_relative = 1e-13);
        assert!(beta > 0.0);
    }

    #[test]
    fn grid_mismatch_and_wrong_plane() {
        let pair = HadamardLoopPair::from_lengths(1.0, 1.0).unwrap();
        let short = systematic_path(0.0, &GridSpec::new(0.0, 0.9, 0.01).unwrap()).unwrap();
        assert!(matches!(
            perturbed_alpha(&pair.loop_i, &short),
            Err(LoopError::GridMismatch { .. })
        ));
        let ok = systematic_path(0.0, &grid_for(&pair.loop_i, 0.01)).unwrap();
        assert!(matches!(
            perturbed_beta(&pair.loop_i, &ok),
            Err(LoopError::WrongPlane { .. })
        ));
    }

    /// Simpson's rule on the same samples; agrees with the trapezoid to the
    /// grid's truncation error, which the smooth integrand keeps tiny.
    fn simpson(path: &NoisePath, f: impl Fn(f64) -> f64) -> f64 {
        let v = path.values();
        let n = v.len() - 1;
        assert!(n.is_multiple_of(2));
        let h = path.spacing();
        let mut s = f(v[0]) + f(v[n]);
        for (k, &x) in v.iter().enumerate().take(n).skip(1) {
            s += if k % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
        }
        s * h / 3.0
    }

    #[test]
    fn alpha_matches_simpson_on_smooth_sampled_path() {
        let pair = HadamardLoopPair::from_lengths(1.0, 1.0).unwrap();
        let g = grid_for(&pair.loop_i, 1e-4);
        let values = g.points().iter().map(|x| 0.01 * (3.0 * x).sin()).collect();
        let path = NoisePath::from_samples(g.points(), values);
        let alpha = perturbed_alpha(&pair.loop_i, &path).unwrap();
        let oracle = (-2.0 * pair.loop_i.d).exp() * simpson(&path, |dr| 1.0 - (-2.0 * dr).exp());
        assert!((alpha - oracle).abs() < 1e-10, "{alpha} vs {oracle}");
    }

    proptest! {
        #[test]
        fn dx_round_trip(l in (FRAC_PI_4 + 0.05)..10.0f64) {
            let lp = RectLoop::new(Plane::XPlane, 0.0, l, solve_dx(l).unwrap()).unwrap();
            prop_assert!((area_sigma(&lp) - FRAC_PI_4).abs() < 1e-12);
        }

        #[test]
        fn dy_round_trip(l in 0.05..10.0f64) {
            let lp = RectLoop::new(Plane::YPlane, 0.0, l, solve_dy(l).unwrap()).unwrap();
            prop_assert!((area_sigma(&lp) - FRAC_PI_2).abs() < 1e-12);
        }

        #[test]
        fn alpha_is_area_deviation(l in 0.9..5.0f64, c in -0.2..0.2f64) {
            let d = solve_dx(l).unwrap();
            let lp = RectLoop::new(Plane::XPlane, 0.0, l, d).unwrap();
            let path = systematic_path(c, &grid_for(&lp, 0.01)).unwrap();
            let raised = RectLoop::new(Plane::XPlane, 0.0, l, d + c.max(-d)).unwrap();
            prop_assume!(d + c >= 0.0);
            let deviation = area_sigma(&raised) - FRAC_PI_4;
            prop_assert!((perturbed_alpha(&lp, &path).unwrap() - deviation).abs() < 1e-12);
        }

        #[test]
        fn alpha_increases_with_noise(
            l in 0.9..5.0f64,
            base in proptest::collection::vec(-0.1..0.1f64, 11),
            eps in 1e-6..0.05f64,
        ) {
            let lp = RectLoop::new(Plane::XPlane, 0.0, l, solve_dx(l).unwrap()).unwrap();
            let g = GridSpec::new(0.0, l, l / 10.0).unwrap();
            prop_assume!(g.points().len() == base.len());
            let lower = NoisePath::from_samples(g.points(), base.clone());
            let upper = NoisePath::from_samples(g.points(), base.iter().map(|v| v + eps).collect());
            prop_assert!(perturbed_alpha(&lp, &upper).unwrap() > perturbed_alpha(&lp, &lower).unwrap());
        }
    }
}
