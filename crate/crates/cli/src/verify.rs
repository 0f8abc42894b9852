//! Self-check suite behind `holonoise verify`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;

use holonoise::ensemble::{run_ensemble_with, Execution, ExperimentConfig, NoiseMode};
use holonoise::gatelab::{hadamard_matrix, ideal_hadamard, perturbed_gate, realization_density};
use holonoise::holonomy::{noisy_rect_holonomy, rect_holonomy};
use holonoise::loops::{area_sigma, perturbed_alpha, perturbed_beta, solve_dx, solve_dy, HadamardLoopPair, Plane, RectLoop};
use holonoise::ounoise::{sample_ou, GridSpec, OUParams, PlaneTag, RngStream};
use holonoise::qmath::{conjugate_state, purity, su2_exp, BasisLabel, C2Matrix, Complex64};
use holonoise::Orientation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;
const NOISY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Loop traversal used for the holonomy checks. Anything but
    /// `Positive` is a negative control and must fail.
    pub orientation: Orientation,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            orientation: Orientation::Positive,
            seed: 20_240_601,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub detail: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "[{tag}] {:<width$}  {}", c.name, c.detail)?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

fn check(name: &'static str, err: f64, tol: f64, what: impl fmt::Display) -> Check {
    Check {
        name,
        detail: format!("{what}; max error {err:.3e} (tol {tol:.0e})"),
        passed: err <= tol,
    }
}

fn minus_i_hadamard() -> C2Matrix {
    hadamard_matrix().scale(Complex64::new(0.0, -1.0))
}

pub fn run_verify(opts: &VerifyOptions) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::new();

    // su(2) exponential
    let mut err = 0.0f64;
    for _ in 0..200 {
        let c = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
        let u = su2_exp(c);
        let inv = su2_exp([-c[0], -c[1], -c[2]]);
        err = err
            .max(u.matrix().unitarity_defect())
            .max((u.matrix().det() - Complex64::new(1.0, 0.0)).norm())
            .max((u * inv).matrix().max_abs_diff(&C2Matrix::identity()));
    }
    checks.push(check("su2 exponential invariants", err, TOL, "200 random exponents"));

    let err = ideal_hadamard().matrix().max_abs_diff(&minus_i_hadamard());
    checks.push(check("Hadamard from closed-form rotations", err, TOL, "exp(-i sx pi/2) exp(-i sy pi/4) = -iH0"));

    let pair = HadamardLoopPair::from_lengths(1.0, 1.0)
        .expect("unit loops are valid")
        .with_orientation(opts.orientation);
    let (sigma_i, sigma_ii) = (area_sigma(&pair.loop_i), area_sigma(&pair.loop_ii));
    let composed = rect_holonomy(&pair.loop_ii, 1).and_then(|g2| Ok(g2 * rect_holonomy(&pair.loop_i, 1)?));
    checks.push(match composed {
        Ok(g) => check(
            "Hadamard from loop holonomies",
            g.matrix().max_abs_diff(&minus_i_hadamard()),
            TOL,
            format!("Sigma_I = {sigma_i} (pi/4), Sigma_II = {sigma_ii} (pi/2)"),
        ),
        Err(e) => Check { name: "Hadamard from loop holonomies", detail: e.to_string(), passed: false },
    });

    let mut err = 0.0f64;
    for _ in 0..100 {
        let lx = rng.random_range(FRAC_PI_4 + 0.05..10.0);
        let ly = rng.random_range(0.05..10.0);
        let li = RectLoop::new(Plane::XPlane, 0.0, lx, solve_dx(lx).expect("lx > pi/4")).expect("valid");
        let lii = RectLoop::new(Plane::YPlane, 0.0, ly, solve_dy(ly).expect("ly > 0")).expect("valid");
        err = err
            .max((area_sigma(&li) - FRAC_PI_4).abs())
            .max((area_sigma(&lii) - FRAC_PI_2).abs());
    }
    checks.push(check(
        "loop calibration round trip",
        err,
        TOL,
        format!("100 random lengths; Sigma_I = pi/4 = {FRAC_PI_4}, Sigma_II = pi/2 = {FRAC_PI_2}"),
    ));

    let mut err = 0.0f64;
    let mut failure = None;
    for steps in [1, 10, 1000] {
        match (rect_holonomy(&pair.loop_i, steps), rect_holonomy(&pair.loop_ii, steps)) {
            (Ok(gi), Ok(gii)) => {
                err = err
                    .max(gi.matrix().max_abs_diff(su2_exp([0.0, FRAC_PI_4, 0.0]).matrix()))
                    .max(gii.matrix().max_abs_diff(su2_exp([FRAC_PI_2, 0.0, 0.0]).matrix()));
            }
            (Err(e), _) | (_, Err(e)) => failure = Some(e.to_string()),
        }
    }
    checks.push(match failure {
        None => check("ideal holonomy exactness", err, TOL, "steps per segment 1, 10, 1000"),
        Some(e) => Check { name: "ideal holonomy exactness", detail: e, passed: false },
    });

    let ou = OUParams::new(1e-4, 5.0).expect("valid OU parameters");
    let mut err = 0.0f64;
    let mut failure = None;
    for i in 0..10 {
        for (lp, plane) in [(&pair.loop_i, PlaneTag::X), (&pair.loop_ii, PlaneTag::Y)] {
            let grid = GridSpec::new(lp.a, lp.b, 0.01).expect("valid grid");
            let noise = sample_ou(&ou, &grid, RngStream::new(opts.seed, i, plane)).expect("valid noise");
            let expected = match lp.plane {
                Plane::XPlane => su2_exp([0.0, FRAC_PI_4 + perturbed_alpha(lp, &noise).expect("grid"), 0.0]),
                Plane::YPlane => su2_exp([FRAC_PI_2 + perturbed_beta(lp, &noise).expect("grid"), 0.0, 0.0]),
            };
            match noisy_rect_holonomy(lp, &noise, 1) {
                Ok(g) => err = err.max(g.matrix().max_abs_diff(expected.matrix())),
                Err(e) => failure = Some(e.to_string()),
            }
        }
    }
    checks.push(match failure {
        None => check("noisy holonomy vs perturbed area", err, NOISY_TOL, "10 OU paths per loop"),
        Some(e) => Check { name: "noisy holonomy vs perturbed area", detail: e, passed: false },
    });

    let mut err = 0.0f64;
    for _ in 0..200 {
        let (alpha, beta) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let gate = perturbed_gate(alpha, beta);
        for j in [BasisLabel::Zero, BasisLabel::One] {
            let closed = realization_density(j, alpha, beta);
            err = err
                .max(closed.matrix().max_abs_diff(conjugate_state(&gate, j).matrix()))
                .max((purity(&closed) - 1.0).abs());
        }
    }
    checks.push(check("closed-form output state", err, TOL, "200 random (alpha, beta), both inputs"));

    let cfg = ExperimentConfig {
        n_realizations: 200,
        mode: NoiseMode::Systematic { offset_x: 0.05, offset_y: 0.02 },
        ..ExperimentConfig::default()
    };
    checks.push(match run_ensemble_with(&cfg, Execution::Sequential) {
        Ok(r) => check(
            "systematic errors keep purity 1",
            (r.purity_mc - 1.0).abs(),
            TOL,
            format!("offsets (0.05, 0.02): I = {}, F = {}", r.purity_mc, r.fidelity_mc),
        ),
        Err(e) => Check { name: "systematic errors keep purity 1", detail: e.to_string(), passed: false },
    });

    VerifyReport { checks }
}
