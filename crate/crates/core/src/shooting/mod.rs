//! Fundamental matrices, the characteristic function `Γ`, and eigenvalue
//! location by argument-principle counting.

mod characteristic;
mod contour;
mod eigen;
mod locate;
mod propagate;

use num_complex::Complex64;
use thiserror::Error;

pub use characteristic::{gamma, gamma_scaled, Characteristic, Frame, ScaledValue};
pub use contour::{analytic_multiplicity, count_in_interval, ContourConfig, CountReport, Counter};
pub use eigen::{eigenfunction, geometric_multiplicity, Eigenfunction};
pub use locate::{
    locate_eigenvalues, locate_with, lowest_eigenvalues, nth_eigenvalue, nth_eigenvalues, spectral_lower_bound,
    SearchPolicy, Solver, SpectrumSlice, RELATIVE_FLOOR,
};
pub use propagate::{lagrange_residual, propagate, transfer_matrix, Propagation};

/// Which end of a counting interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Left,
    Right,
}

#[derive(Debug, Error)]
pub enum ShootingError {
    #[error("field has dimension {field} but boundary condition has dimension {bc}")]
    DimensionMismatch { field: usize, bc: usize },
    #[error("fundamental matrices overflow at λ = {lambda}")]
    Overflow { lambda: Complex64 },
    #[error("{endpoint:?} endpoint {at} is too close to an eigenvalue (ln |Γ|/max|Γ| = {log_ratio:.2})")]
    EndpointTooCloseToEigenvalue { endpoint: Endpoint, at: f64, log_ratio: f64 },
    #[error("contour refinement limit reached after {evaluations} evaluations")]
    ContourRefinementLimit { evaluations: usize },
    #[error("Γ vanishes on or too near the contour at {at}")]
    ZeroOnContour { at: Complex64 },
    #[error("winding number {winding:.3} is not an integer")]
    NonIntegerWinding { winding: f64 },
    #[error("bisection depth exceeded near {at}")]
    BisectionDepthExceeded { at: f64 },
    #[error("no lower spectral bound found above {bound:e}")]
    SearchExhausted { bound: f64 },
    #[error("index {index} out of range ({available} available)")]
    IndexOutOfRange { index: usize, available: usize },
    #[error("invalid interval ({r1}, {r2})")]
    InvalidInterval { r1: f64, r2: f64 },
    #[error(transparent)]
    Kernel(#[from] crate::kernel::KernelError),
}
