//! Exact 2×2 complex linear algebra for a single qubit.
//!
//! Everything here is closed form: Pauli matrices, the su(2) exponential
//! `exp(-i c·σ) = cos|c| - i sin|c| (ĉ·σ)`, and the linear fidelity
//! `tr(ρ₀ρ)` / purity `tr(ρ²)` functionals used to score noisy gates.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
pub use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for the structural invariants (unitarity, hermiticity, trace).
pub const STRUCTURAL_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QmathError {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not unitary (max |U†U - 1| = {0:e})")]
    NotUnitary(f64),
    #[error("matrix is not Hermitian (max |ρ - ρ†| = {0:e})")]
    NotHermitian(f64),
    #[error("density matrix trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("density matrix has negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),
    #[error("basis label must be 0 or 1, got {0}")]
    BadLabel(u8),
}

/// A 2×2 complex matrix, row-major.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct C2Matrix {
    pub entries: [[C64; 2]; 2],
}

impl fmt::Debug for C2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.entries;
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            e[0][0], e[0][1], e[1][0], e[1][1]
        )
    }
}

impl C2Matrix {
    pub const fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        Self {
            entries: [[m00, m01], [m10, m11]],
        }
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Self::new(
            m[0][0].into(),
            m[0][1].into(),
            m[1][0].into(),
            m[1][1].into(),
        )
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row][col]
    }

    pub fn dagger(&self) -> Self {
        let e = &self.entries;
        Self::new(e[0][0].conj(), e[1][0].conj(), e[0][1].conj(), e[1][1].conj())
    }

    pub fn trace(&self) -> C64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn det(&self) -> C64 {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    pub fn scale(&self, k: C64) -> Self {
        let e = &self.entries;
        Self::new(k * e[0][0], k * e[0][1], k * e[1][0], k * e[1][1])
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(C64::new(k, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().flatten().all(|z| z.is_finite())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    pub fn unitarity_defect(&self) -> f64 {
        (self.dagger() * *self).max_abs_diff(&Self::identity())
    }

    /// Eigenvalues of a Hermitian matrix, ascending, via the quadratic formula.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let e = &self.entries;
        let a = e[0][0].re;
        let d = e[1][1].re;
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d) * (a - d) + e[0][1].norm_sqr()).sqrt();
        [mean - half_gap, mean + half_gap]
    }

    /// Decompose a Hermitian matrix as `k0·1 + k·σ`.
    pub fn pauli_coefficients(&self) -> (f64, [f64; 3]) {
        let e = &self.entries;
        let k0 = 0.5 * (e[0][0].re + e[1][1].re);
        let kx = 0.5 * (e[0][1].re + e[1][0].re);
        let ky = 0.5 * (e[1][0].im - e[0][1].im);
        let kz = 0.5 * (e[0][0].re - e[1][1].re);
        (k0, [kx, ky, kz])
    }
}

impl Add for C2Matrix {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (a, b) = (&self.entries, &rhs.entries);
        Self::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for C2Matrix {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for C2Matrix {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_real(-1.0)
    }
}

impl Mul for C2Matrix {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.entries, &rhs.entries);
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<C2Matrix> for C64 {
    type Output = C2Matrix;
    fn mul(self, rhs: C2Matrix) -> C2Matrix {
        rhs.scale(self)
    }
}

impl Mul<C2Matrix> for f64 {
    type Output = C2Matrix;
    fn mul(self, rhs: C2Matrix) -> C2Matrix {
        rhs.scale_real(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn pauli(axis: Axis) -> C2Matrix {
    match axis {
        Axis::X => C2Matrix::new(ZERO, ONE, ONE, ZERO),
        Axis::Y => C2Matrix::new(ZERO, -I, I, ZERO),
        Axis::Z => C2Matrix::new(ONE, ZERO, ZERO, -ONE),
    }
}

/// `c·σ` for a real 3-vector.
pub fn pauli_combination(c: [f64; 3]) -> C2Matrix {
    let [x, y, z] = c;
    C2Matrix::new(
        C64::new(z, 0.0),
        C64::new(x, -y),
        C64::new(x, y),
        C64::new(-z, 0.0),
    )
}

/// A 2×2 unitary. Construction through [`UnitaryGate::new`] checks `U†U = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitaryGate(C2Matrix);

impl UnitaryGate {
    pub fn new(matrix: C2Matrix) -> Result<Self, QmathError> {
        if !matrix.is_finite() {
            return Err(QmathError::NonFinite);
        }
        let defect = matrix.unitarity_defect();
        if defect > STRUCTURAL_TOL {
            return Err(QmathError::NotUnitary(defect));
        }
        Ok(Self(matrix))
    }

    /// Skips the unitarity check. Only for products of checked unitaries,
    /// whose defect grows with rounding alone.
    pub(crate) fn from_product(matrix: C2Matrix) -> Self {
        Self(matrix)
    }

    pub fn identity() -> Self {
        Self(C2Matrix::identity())
    }

    pub fn matrix(&self) -> &C2Matrix {
        &self.0
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.dagger())
    }

    /// `self · rhs`, i.e. `rhs` is applied first.
    pub fn then_after(&self, rhs: &UnitaryGate) -> Self {
        Self(self.0 * rhs.0)
    }

    /// Distance to `other` ignoring global phase: `1 - |tr(U V†)|/2`.
    pub fn phase_insensitive_distance(&self, other: &UnitaryGate) -> f64 {
        1.0 - 0.5 * (self.0 * other.0.dagger()).trace().norm()
    }
}

impl Mul for UnitaryGate {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

/// `exp(-i (c·σ))` in closed form.
pub fn su2_exp(c: [f64; 3]) -> UnitaryGate {
    let theta = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    if theta == 0.0 {
        return UnitaryGate::identity();
    }
    let (s, co) = theta.sin_cos();
    let k = s / theta;
    let (nx, ny, nz) = (k * c[0], k * c[1], k * c[2]);
    // cos θ·1 - i sinθ (n·σ)
    UnitaryGate(C2Matrix::new(
        C64::new(co, -nz),
        C64::new(-ny, -nx),
        C64::new(ny, -nx),
        C64::new(co, nz),
    ))
}

/// `exp(M)` for an anti-Hermitian `M`, via `M = -i(k0·1 + k·σ)`.
pub fn exp_anti_hermitian(m: &C2Matrix) -> UnitaryGate {
    // K = iM is Hermitian and exp(M) = exp(-iK).
    let k = m.scale(I);
    let (k0, kv) = k.pauli_coefficients();
    let su2 = su2_exp(kv);
    if k0 == 0.0 {
        su2
    } else {
        UnitaryGate(su2.0.scale(C64::from_polar(1.0, -k0)))
    }
}

/// Computational-basis label `j ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum BasisLabel {
    Zero,
    One,
}

impl BasisLabel {
    pub fn index(self) -> usize {
        match self {
            BasisLabel::Zero => 0,
            BasisLabel::One => 1,
        }
    }

    pub fn complement(self) -> Self {
        match self {
            BasisLabel::Zero => BasisLabel::One,
            BasisLabel::One => BasisLabel::Zero,
        }
    }

    /// `(-1)^j`
    pub fn sign(self) -> f64 {
        match self {
            BasisLabel::Zero => 1.0,
            BasisLabel::One => -1.0,
        }
    }

    pub fn projector(self) -> C2Matrix {
        let mut m = C2Matrix::zero();
        m.entries[self.index()][self.index()] = ONE;
        m
    }
}

impl TryFrom<u8> for BasisLabel {
    type Error = QmathError;
    fn try_from(j: u8) -> Result<Self, QmathError> {
        match j {
            0 => Ok(BasisLabel::Zero),
            1 => Ok(BasisLabel::One),
            other => Err(QmathError::BadLabel(other)),
        }
    }
}

impl From<BasisLabel> for u8 {
    fn from(j: BasisLabel) -> u8 {
        j.index() as u8
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// A qubit density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix(C2Matrix);

impl DensityMatrix {
    pub fn new(matrix: C2Matrix) -> Result<Self, QmathError> {
        if !matrix.is_finite() {
            return Err(QmathError::NonFinite);
        }
        let herm = matrix.hermiticity_defect();
        if herm > STRUCTURAL_TOL {
            return Err(QmathError::NotHermitian(herm));
        }
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > STRUCTURAL_TOL {
            return Err(QmathError::BadTrace(tr));
        }
        let [low, _] = matrix.hermitian_eigenvalues();
        if low < -STRUCTURAL_TOL {
            return Err(QmathError::NegativeEigenvalue(low));
        }
        Ok(Self(matrix))
    }

    pub fn pure(j: BasisLabel) -> Self {
        Self(j.projector())
    }

    pub fn maximally_mixed() -> Self {
        Self(C2Matrix::identity().scale_real(0.5))
    }

    pub fn matrix(&self) -> &C2Matrix {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0.get(row, col)
    }

    /// Convex combination `w·self + (1-w)·other`.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<Self, QmathError> {
        Self::new(self.0.scale_real(w) + other.0.scale_real(1.0 - w))
    }
}

/// `g |j⟩⟨j| g†`
pub fn conjugate_state(g: &UnitaryGate, j: BasisLabel) -> DensityMatrix {
    // Column j of g is g|j⟩.
    let m = g.matrix();
    let (u0, u1) = (m.get(0, j.index()), m.get(1, j.index()));
    DensityMatrix(C2Matrix::new(
        u0 * u0.conj(),
        u0 * u1.conj(),
        u1 * u0.conj(),
        u1 * u1.conj(),
    ))
}

/// Linear fidelity `tr(reference · state)`.
pub fn fidelity(reference: &DensityMatrix, state: &DensityMatrix) -> f64 {
    (reference.0 * state.0).trace().re
}

/// `tr(ρ²)`
pub fn purity(state: &DensityMatrix) -> f64 {
    (state.0 * state.0).trace().re
}
