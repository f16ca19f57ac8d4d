//! Self-adjoint boundary conditions `(A|B) Y(a,b) = 0`.
//!
//! The trace vector is ordered `Y = (−y(a), y(b), (Py')(a), (Py')(b))`, so
//! `A` acts on the value traces and `B` on the flux traces. A condition is an
//! equivalence class under left multiplication by invertible matrices; all
//! comparisons go through row spaces.

mod chart;
mod config;
mod path;
mod strata;

pub use chart::{chart_compose, chart_decompose, express_in_chart, ChartRepr};
pub use config::{load_bc, BcDocument, Entry};
pub use path::{connect_in_chart, connect_within_stratum};
pub use strata::{
    approach_path, canonical_singular, full_chart_partition_pairs, stratum_label, stratum_label_in, stratum_margin, StratumLabel,
};

use num_complex::Complex64;
use thiserror::Error;

use crate::kernel::{orthonormalize_columns, rank_tol, singular_values, CMatrix, KernelError};

/// Relative tolerance of the self-adjointness residual `‖AB* − BA*‖_max`.
pub const SA_RTOL: f64 = 1e-10;
/// Relative singular-value cutoff for rank decisions on `(A|B)`.
pub const BC_RANK_RTOL: f64 = 1e-9;
/// Absolute singular-value cutoff on row-orthonormalized blocks.
pub const NORMALIZED_RANK_TOL: f64 = 1e-9;
/// Cutoff on the stacked normalized blocks used by row-space equality.
pub const SAME_ROW_SPACE_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BcError {
    #[error("(A|B) has rank {actual}, expected {expected}")]
    RankDeficient { actual: usize, expected: usize },
    #[error("AB* - BA* has residual {residual:e}")]
    NotSelfAdjoint { residual: f64 },
    #[error("S is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("boundary condition is not in chart {k:?}")]
    NotInChart { k: Vec<usize> },
    #[error("stratum labels differ: {0} vs {1}")]
    StrataMismatch(String, String),
    #[error("tau {0} outside [0, 1]")]
    TauOutOfRange(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// A validated self-adjoint boundary condition.
#[derive(Debug, Clone)]
pub struct BoundaryCondition {
    dim: usize,
    a: CMatrix,
    b: CMatrix,
}

/// Validates `A`, `B` as a self-adjoint boundary condition.
pub fn validate(a: CMatrix, b: CMatrix) -> Result<BoundaryCondition, BcError> {
    BoundaryCondition::new(a, b)
}

impl BoundaryCondition {
    pub fn new(a: CMatrix, b: CMatrix) -> Result<Self, BcError> {
        let n = a.rows();
        if n == 0 || !n.is_multiple_of(2) || !a.is_square() || b.rows() != n || b.cols() != n {
            return Err(BcError::Dimension(format!(
                "A is {}x{}, B is {}x{}; both must be 2d x 2d",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            )));
        }
        let ab = a.hstack(&b)?;
        let rank = rank_tol(&ab, BC_RANK_RTOL);
        if rank != n {
            return Err(BcError::RankDeficient { actual: rank, expected: n });
        }
        let residual = a.matmul(&b.adjoint())?.sub(&b.matmul(&a.adjoint())?)?.max_abs();
        let scale = ab.max_abs().powi(2).max(f64::MIN_POSITIVE);
        if residual > SA_RTOL * scale {
            return Err(BcError::NotSelfAdjoint { residual });
        }
        Ok(Self { dim: n / 2, a, b })
    }

    /// Real boundary condition from row-major entries.
    pub fn from_real(d: usize, a: &[f64], b: &[f64]) -> Result<Self, BcError> {
        Self::new(CMatrix::from_real_row_major(2 * d, 2 * d, a)?, CMatrix::from_real_row_major(2 * d, 2 * d, b)?)
    }

    /// `[I | 0]`, `y(a) = y(b) = 0`.
    pub fn dirichlet(d: usize) -> Self {
        Self { dim: d, a: CMatrix::identity(2 * d), b: CMatrix::zeros(2 * d, 2 * d) }
    }

    /// `[0 | I]`, `(Py')(a) = (Py')(b) = 0`.
    pub fn neumann(d: usize) -> Self {
        Self { dim: d, a: CMatrix::zeros(2 * d, 2 * d), b: CMatrix::identity(2 * d) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    /// The `2d × 4d` block `(A|B)`.
    pub fn block(&self) -> CMatrix {
        self.a.hstack(&self.b).expect("A and B share a row count")
    }

    /// True when every entry of `A` and `B` is real.
    pub fn is_real(&self) -> bool {
        self.a.to_row_major().iter().chain(self.b.to_row_major().iter()).all(|z| z.im == 0.0)
    }

    /// An equivalent condition whose `(A|B)` rows are orthonormal.
    pub fn normalized(&self) -> Self {
        let (q, _) = orthonormalize_columns(&self.block().adjoint()).expect("validated block has full row rank");
        let rows = q.adjoint();
        let n = 2 * self.dim;
        Self { dim: self.dim, a: rows.block(0, 0, n, n), b: rows.block(0, n, n, n) }
    }

    /// Left multiplication by an invertible `T`.
    pub fn transformed(&self, t: &CMatrix) -> Result<Self, BcError> {
        Self::new(t.matmul(&self.a)?, t.matmul(&self.b)?)
    }

    /// Entrywise complex conjugate, itself self-adjoint.
    pub fn conj(&self) -> Self {
        Self { dim: self.dim, a: self.a.conj(), b: self.b.conj() }
    }

    /// Row-space equality: the stacked `4d × 4d` block has rank `2d`.
    pub fn same_as(&self, other: &Self) -> bool {
        if self.dim != other.dim {
            return false;
        }
        let stacked = self.normalized().block().vstack(&other.normalized().block()).expect("equal widths");
        let sv = singular_values(&stacked);
        sv.iter().filter(|&&s| s > SAME_ROW_SPACE_TOL).count() == 2 * self.dim
    }

    /// Largest principal angle proxy: the `(2d+1)`-th singular value of the
    /// stacked normalized blocks. Zero for equal row spaces.
    pub fn distance(&self, other: &Self) -> f64 {
        let stacked = self.normalized().block().vstack(&other.normalized().block()).expect("equal widths");
        singular_values(&stacked).get(2 * self.dim).copied().unwrap_or(0.0)
    }

    /// Applies `(A|B)` to a trace vector `Y`.
    pub fn apply(&self, y: &[Complex64]) -> Vec<Complex64> {
        self.block().apply(y)
    }
}

/// `n⁰(B) = 2d − rank(B)` on the row-orthonormalized representative.
pub fn layer_index(bc: &BoundaryCondition) -> usize {
    let nb = bc.normalized();
    let rank = singular_values(nb.b()).iter().filter(|&&s| s > NORMALIZED_RANK_TOL).count();
    2 * bc.dim() - rank
}
