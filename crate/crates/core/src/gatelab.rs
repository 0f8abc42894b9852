//! Ideal and perturbed two-loop Hadamard gates and their output states.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::loops::{perturbed_alpha, perturbed_beta, HadamardLoopPair, LoopError};
use crate::ounoise::NoisePath;
use crate::qmath::{su2_exp, BasisLabel, C2Matrix, DensityMatrix, UnitaryGate};

/// `exp(-iσ_x π/2) · exp(-iσ_y π/4) = -iH₀`.
pub fn ideal_hadamard() -> UnitaryGate {
    perturbed_gate(0.0, 0.0)
}

/// `H₀ = (1/√2)[[1, 1], [1, -1]]`
pub fn hadamard_matrix() -> C2Matrix {
    C2Matrix::from_real([[1.0, 1.0], [1.0, -1.0]]).scale_real(std::f64::consts::FRAC_1_SQRT_2)
}

/// Loop C_I first with area `π/4 + α`, then C_II with area `π/2 + β`.
pub fn perturbed_gate(alpha: f64, beta: f64) -> UnitaryGate {
    su2_exp([FRAC_PI_2 + beta, 0.0, 0.0]) * su2_exp([0.0, FRAC_PI_4 + alpha, 0.0])
}

/// Output state `ρ̃_j = H|j⟩⟨j|H†` in closed form, with `γ = α - π/4`:
/// diagonal `½ ± ½ cos2γ cos2β`, and
/// `⟨j|ρ̃|nj⟩ = (i/2) sin2β cos2γ - ½(-1)^j sin2γ`.
pub fn realization_density(j: BasisLabel, alpha: f64, beta: f64) -> DensityMatrix {
    // cos 2γ = sin 2α and sin 2γ = -cos 2α, evaluated without the π/2 shift.
    let (sin2a, cos2a) = (2.0 * alpha).sin_cos();
    let (sin2b, cos2b) = (2.0 * beta).sin_cos();
    let (cos2g, sin2g) = (sin2a, -cos2a);

    let diag_dev = 0.5 * cos2g * cos2b;
    let coherence = C64::new(-0.5 * j.sign() * sin2g, 0.5 * sin2b * cos2g);

    let mut m = C2Matrix::zero();
    let (jj, nj) = (j.index(), j.complement().index());
    m.entries[jj][jj] = C64::new(0.5 + diag_dev, 0.0);
    m.entries[nj][nj] = C64::new(0.5 - diag_dev, 0.0);
    m.entries[jj][nj] = coherence;
    m.entries[nj][jj] = coherence.conj();
    DensityMatrix::new(m).expect("closed-form output state is a valid density matrix")
}

/// Everything one noise realization produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateRealization {
    pub alpha: f64,
    pub beta: f64,
    /// `α - π/4`
    pub gamma: f64,
    pub gate: UnitaryGate,
    /// Indexed by [`BasisLabel::index`].
    pub per_state: [DensityMatrix; 2],
}

impl GateRealization {
    pub fn from_angles(alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma: alpha - FRAC_PI_4,
            gate: perturbed_gate(alpha, beta),
            per_state: [
                realization_density(BasisLabel::Zero, alpha, beta),
                realization_density(BasisLabel::One, alpha, beta),
            ],
        }
    }

    pub fn state(&self, j: BasisLabel) -> &DensityMatrix {
        &self.per_state[j.index()]
    }
}

/// Integrates the noise into `α`, `β` and assembles the realization.
pub fn realize(
    pair: &HadamardLoopPair,
    noise_x: &NoisePath,
    noise_y: &NoisePath,
) -> Result<GateRealization, LoopError> {
    let alpha = perturbed_alpha(&pair.loop_i, noise_x)?;
    let beta = perturbed_beta(&pair.loop_ii, noise_y)?;
    Ok(GateRealization::from_angles(alpha, beta))
}
