//! Arnold charts `O_K` on the boundary-condition manifold.
//!
//! In chart `K` (0-based column indices here) the condition with Hermitian
//! coordinates `S` has columns `a_i = −e_i`, `b_i = s_i` for `i ∈ K` and
//! `a_i = s_i`, `b_i = e_i` otherwise.

use num_complex::Complex64;

use super::{BcError, BoundaryCondition, NORMALIZED_RANK_TOL};
use crate::kernel::{singular_values, CMatrix, HERMITIAN_RTOL};

/// Reciprocal condition number below which a chart transform is rejected.
const CHART_RCOND: f64 = 1e-12;

/// Chart index set `K` (sorted, 0-based) and Hermitian coordinates `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartRepr {
    pub dim: usize,
    pub k: Vec<usize>,
    pub s: CMatrix,
}

impl ChartRepr {
    pub fn new(k: Vec<usize>, s: CMatrix) -> Result<Self, BcError> {
        let n = s.rows();
        if n == 0 || !n.is_multiple_of(2) || !s.is_square() {
            return Err(BcError::Dimension(format!("S is {}x{}, expected 2d x 2d", s.rows(), s.cols())));
        }
        check_index_set(&k, n)?;
        let residual = s.hermitian_residual();
        if residual > HERMITIAN_RTOL * s.max_abs().max(1.0) {
            return Err(BcError::NotHermitian { residual });
        }
        Ok(Self { dim: n / 2, k, s: s.hermitian_part()? })
    }

    pub fn in_k(&self, i: usize) -> bool {
        self.k.binary_search(&i).is_ok()
    }

    /// Principal submatrix `S_K`.
    pub fn s_k(&self) -> CMatrix {
        self.s.select(&self.k, &self.k)
    }

    pub fn compose(&self) -> BoundaryCondition {
        compose_unchecked(self.dim, &self.k, &self.s)
    }

    /// Splits a trace `Y = (ρ, η)` into `u` with `(A|B)Y = S u + v`:
    /// `u_i = η_i` on `K`, `u_i = ρ_i` off `K`.
    pub fn u_from_trace(&self, y: &[Complex64]) -> Vec<Complex64> {
        let n = 2 * self.dim;
        (0..n).map(|i| if self.in_k(i) { y[n + i] } else { y[i] }).collect()
    }
}

pub(crate) fn check_index_set(k: &[usize], n: usize) -> Result<(), BcError> {
    if k.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BcError::InvalidIndexSet(format!("{k:?} is not strictly increasing")));
    }
    if k.iter().any(|&i| i >= n) {
        return Err(BcError::InvalidIndexSet(format!("{k:?} has an index >= {n}")));
    }
    Ok(())
}

fn compose_unchecked(d: usize, k: &[usize], s: &CMatrix) -> BoundaryCondition {
    let n = 2 * d;
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    let mut b = vec![Complex64::new(0.0, 0.0); n * n];
    for col in 0..n {
        let in_k = k.binary_search(&col).is_ok();
        for row in 0..n {
            let e = if row == col { 1.0 } else { 0.0 };
            let sv = s.get(row, col);
            if in_k {
                a[row * n + col] = Complex64::new(-e, 0.0);
                b[row * n + col] = sv;
            } else {
                a[row * n + col] = sv;
                b[row * n + col] = Complex64::new(e, 0.0);
            }
        }
    }
    let a = CMatrix::from_row_major(n, n, a).expect("finite chart entries");
    let b = CMatrix::from_row_major(n, n, b).expect("finite chart entries");
    BoundaryCondition::new(a, b).expect("chart points are self-adjoint boundary conditions")
}

/// The boundary condition with chart coordinates `(K, S)`.
pub fn chart_compose(k: &[usize], s: &CMatrix) -> Result<BoundaryCondition, BcError> {
    Ok(ChartRepr::new(k.to_vec(), s.clone())?.compose())
}

/// Coordinates of `bc` in the lexicographically smallest chart whose `K`
/// columns of `A` are independent and span the column space of `A`.
pub fn chart_decompose(bc: &BoundaryCondition) -> ChartRepr {
    let nb = bc.normalized();
    let n = 2 * bc.dim();
    let mut k: Vec<usize> = Vec::new();
    for j in 0..n {
        let mut trial = k.clone();
        trial.push(j);
        let cols = nb.a().select(&(0..n).collect::<Vec<_>>(), &trial);
        let sv = singular_values(&cols);
        if sv.iter().filter(|&&s| s > NORMALIZED_RANK_TOL).count() == trial.len() {
            k = trial;
        }
    }
    express_normalized(&nb, &k).expect("greedy chart is non-degenerate for a self-adjoint condition")
}

/// Coordinates of `bc` in the prescribed chart `K`.
pub fn express_in_chart(bc: &BoundaryCondition, k: &[usize]) -> Result<ChartRepr, BcError> {
    check_index_set(k, 2 * bc.dim())?;
    express_normalized(&bc.normalized(), k)
}

fn express_normalized(nb: &BoundaryCondition, k: &[usize]) -> Result<ChartRepr, BcError> {
    let n = 2 * nb.dim();
    let in_k = |i: usize| k.binary_search(&i).is_ok();
    let mut t1 = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            t1.push(if in_k(col) { -nb.a().get(row, col) } else { nb.b().get(row, col) });
        }
    }
    let t1 = CMatrix::from_row_major(n, n, t1)?;
    let sv = singular_values(&t1);
    if sv.last().copied().unwrap_or(0.0) <= CHART_RCOND * sv[0] {
        return Err(BcError::NotInChart { k: k.to_vec() });
    }
    let t1_inv = t1.inverse().map_err(|_| BcError::NotInChart { k: k.to_vec() })?;
    let a2 = t1_inv.matmul(nb.a())?;
    let b2 = t1_inv.matmul(nb.b())?;
    let mut s = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            s.push(if in_k(col) { b2.get(row, col) } else { a2.get(row, col) });
        }
    }
    let s = CMatrix::from_row_major(n, n, s)?.hermitian_part()?;
    Ok(ChartRepr { dim: nb.dim(), k: k.to_vec(), s })
}
