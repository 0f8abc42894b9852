//! Decoherence of a two-loop holonomic Hadamard gate under stochastic
//! squeezing control errors.
//!
//! The gate is the product of two holonomies over rectangular loops in the
//! squeezing/displacement control manifold. Noise on the squeezing
//! magnitude along the top edge of each loop, modeled as an
//! Ornstein-Uhlenbeck process, perturbs the enclosed areas by `α` and `β`.
//! Averaging the resulting pure output states over many realizations gives
//! a mixed state whose fidelity and purity are compared with small-noise
//! closed forms.
//!
//! - [`qmath`]: 2×2 complex algebra, su(2) exponentials, fidelity, purity
//! - [`loops`]: loop geometry, height solvers, area integrals
//! - [`holonomy`]: path-ordered exponentials over a connection field
//! - [`ounoise`]: exact OU sampling and covariance identities
//! - [`gatelab`]: ideal/perturbed gates and per-realization states
//! - [`ensemble`]: Monte Carlo averaging and analytic predictions

pub mod ensemble;
pub mod gatelab;
pub mod holonomy;
pub mod loops;
pub mod ounoise;
pub mod qmath;

pub use ensemble::{
    analytic_fidelity, analytic_purity, analytic_rho, compare, run_ensemble, run_ensemble_with, ComparisonReport,
    Ensemble, EnsembleError, EnsembleResult, Execution, ExperimentConfig, NoiseMode,
};
pub use gatelab::{ideal_hadamard, perturbed_gate, realization_density, realize, GateRealization};
pub use loops::{HadamardLoopPair, Orientation, Plane, RectLoop};
pub use ounoise::{GridSpec, NoisePath, OUParams};
pub use qmath::{BasisLabel, C2Matrix, DensityMatrix, UnitaryGate};
