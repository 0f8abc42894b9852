//! Path-ordered exponentials `P exp ∮ A_μ dλ_μ` over piecewise-linear paths
//! in the control manifold.
//!
//! The shipped connection is an effective per-plane field whose loop
//! integral reproduces the surface integrals of [`crate::loops::area_sigma`]:
//!
//! - x-plane: `A_x = -i e^{-2r₁} σ_y`, every other component zero;
//! - y-plane: `A_y = +i e^{2r₁} σ_x`, every other component zero.
//!
//! Within one plane all field values commute, so the ordered product is
//! the exponential of the line integral.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::loops::{ControlPoint, LoopError, Orientation, Plane, RectLoop};
use crate::ounoise::NoisePath;
use crate::qmath::{exp_anti_hermitian, pauli, Axis, C2Matrix, UnitaryGate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HolonomyError {
    #[error("path needs at least 2 vertices, got {0}")]
    DegeneratePath(usize),
    #[error("steps_per_segment must be >= 1")]
    ZeroSteps,
    #[error(transparent)]
    Loop(#[from] LoopError),
}

/// Coordinate directions `λ_μ` of the control manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    X,
    Y,
    R1,
    Theta1,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::X, Direction::Y, Direction::R1, Direction::Theta1];

    fn delta(self, from: &ControlPoint, to: &ControlPoint) -> f64 {
        match self {
            Direction::X => to.x - from.x,
            Direction::Y => to.y - from.y,
            Direction::R1 => to.r1 - from.r1,
            Direction::Theta1 => to.theta1 - from.theta1,
        }
    }
}

/// A matrix-valued connection: `A_μ(λ)`, anti-Hermitian at every point.
pub trait ConnectionField {
    fn component(&self, at: &ControlPoint, direction: Direction) -> C2Matrix;

    /// `Σ_μ A_μ(at) Δλ_μ` for the displacement `from → to`.
    fn contract(&self, at: &ControlPoint, from: &ControlPoint, to: &ControlPoint) -> C2Matrix {
        Direction::ALL
            .iter()
            .map(|&dir| (dir, dir.delta(from, to)))
            .filter(|&(_, step)| step != 0.0)
            .fold(C2Matrix::zero(), |acc, (dir, step)| {
                acc + self.component(at, dir).scale_real(step)
            })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroConnection;

impl ConnectionField for ZeroConnection {
    fn component(&self, _at: &ControlPoint, _direction: Direction) -> C2Matrix {
        C2Matrix::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EffectiveConnection {
    pub plane: Plane,
}

pub fn effective_connection(plane: Plane) -> EffectiveConnection {
    EffectiveConnection { plane }
}

impl ConnectionField for EffectiveConnection {
    fn component(&self, at: &ControlPoint, direction: Direction) -> C2Matrix {
        use num_complex::Complex64 as C64;
        match (self.plane, direction) {
            (Plane::XPlane, Direction::X) => {
                pauli(Axis::Y).scale(C64::new(0.0, -(-2.0 * at.r1).exp()))
            }
            (Plane::YPlane, Direction::Y) => pauli(Axis::X).scale(C64::new(0.0, (2.0 * at.r1).exp())),
            _ => C2Matrix::zero(),
        }
    }
}

/// Vertices joined by straight segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolylinePath {
    vertices: Vec<ControlPoint>,
}

impl PolylinePath {
    pub fn new(vertices: Vec<ControlPoint>) -> Result<Self, HolonomyError> {
        if vertices.len() < 2 {
            return Err(HolonomyError::DegeneratePath(vertices.len()));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[ControlPoint] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.vertices.first() == self.vertices.last()
    }

    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Self { vertices }
    }
}

/// Ordered product of `exp(A(midpoint)·Δλ)` along the path; later steps
/// multiply on the left.
pub fn path_ordered_exp<F: ConnectionField + ?Sized>(
    field: &F,
    path: &PolylinePath,
    steps_per_segment: usize,
) -> Result<UnitaryGate, HolonomyError> {
    if steps_per_segment == 0 {
        return Err(HolonomyError::ZeroSteps);
    }
    let inv = 1.0 / steps_per_segment as f64;
    let mut acc = C2Matrix::identity();
    for seg in path.vertices.windows(2) {
        let (start, end) = (&seg[0], &seg[1]);
        if start == end {
            continue;
        }
        for k in 0..steps_per_segment {
            let from = start.lerp(end, k as f64 * inv);
            let to = start.lerp(end, (k + 1) as f64 * inv);
            let mid = start.lerp(end, (k as f64 + 0.5) * inv);
            let generator = field.contract(&mid, &from, &to);
            acc = *exp_anti_hermitian(&generator).matrix() * acc;
        }
    }
    Ok(UnitaryGate::from_product(acc))
}

/// How the sampled top edge `d + δr(u_k)` is joined between grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TopEdge {
    /// Sample-and-hold: each sample holds over its half-cells, with vertical
    /// jumps at cell midpoints. The enclosed area equals the trapezoid rule
    /// on the samples.
    #[default]
    Staircase,
    /// Straight segments between consecutive samples.
    Linear,
}

/// Closed polyline of a rectangle whose top edge is `d + δr(·)`.
/// Pass `None` for the ideal rectangle.
pub fn rect_path(lp: &RectLoop, noise: Option<&NoisePath>, top: TopEdge) -> Result<PolylinePath, HolonomyError> {
    let at = |u: f64, r: f64| ControlPoint::in_plane(lp.plane, u, r);
    // Counterclockwise: along the bottom a → b, up, back along the top b → a.
    let mut top_edge: Vec<ControlPoint> = match noise {
        None => vec![at(lp.b, lp.d), at(lp.a, lp.d)],
        Some(path) => {
            lp.check_grid(path)?;
            let (grid, vals) = (path.grid(), path.values());
            let n = grid.len();
            match top {
                TopEdge::Linear => (0..n)
                    .rev()
                    .map(|k| at(grid[k], lp.d + vals[k]))
                    .collect(),
                TopEdge::Staircase => {
                    let mut pts = Vec::with_capacity(2 * n);
                    pts.push(at(lp.b, lp.d + vals[n - 1]));
                    for k in (1..n).rev() {
                        let mid = 0.5 * (grid[k] + grid[k - 1]);
                        pts.push(at(mid, lp.d + vals[k]));
                        pts.push(at(mid, lp.d + vals[k - 1]));
                    }
                    pts.push(at(lp.a, lp.d + vals[0]));
                    pts
                }
            }
        }
    };
    let mut vertices = vec![at(lp.a, 0.0), at(lp.b, 0.0)];
    vertices.append(&mut top_edge);
    vertices.push(at(lp.a, 0.0));
    let path = PolylinePath::new(vertices)?;
    Ok(match lp.orientation {
        Orientation::Positive => path,
        Orientation::Negative => path.reversed(),
    })
}

/// Holonomy of the ideal rectangle under the effective connection.
pub fn rect_holonomy(lp: &RectLoop, steps_per_segment: usize) -> Result<UnitaryGate, HolonomyError> {
    let path = rect_path(lp, None, TopEdge::Staircase)?;
    path_ordered_exp(&effective_connection(lp.plane), &path, steps_per_segment)
}

/// Holonomy of the rectangle whose top edge is displaced by `noise`.
pub fn noisy_rect_holonomy(
    lp: &RectLoop,
    noise: &NoisePath,
    steps_per_segment: usize,
) -> Result<UnitaryGate, HolonomyError> {
    noisy_rect_holonomy_with(lp, noise, steps_per_segment, TopEdge::Staircase)
}

pub fn noisy_rect_holonomy_with(
    lp: &RectLoop,
    noise: &NoisePath,
    steps_per_segment: usize,
    top: TopEdge,
) -> Result<UnitaryGate, HolonomyError> {
    let path = rect_path(lp, Some(noise), top)?;
    path_ordered_exp(&effective_connection(lp.plane), &path, steps_per_segment)
}
