//! Dense complex matrix substrate.
//!
//! [`CMatrix`] is a thin, immutable wrapper around a `nalgebra` complex matrix
//! that rejects non-finite entries at construction. The free functions in this
//! module provide the handful of decompositions the rest of the crate needs:
//! Hermitian inertia, singular-value rank, numerical null spaces, determinants
//! and the matrix exponential used for exact propagation over constant pieces.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance of the Hermitian symmetry check, scaled by `‖M‖_max`.
pub const HERMITIAN_RTOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max asymmetry {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("entry count {got} does not match shape {rows}x{cols}")]
    Shape { rows: usize, cols: usize, got: usize },
    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    inner: DMatrix<Complex64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.inner[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self, KernelError> {
        if rows * cols != entries.len() {
            return Err(KernelError::Shape { rows, cols, got: entries.len() });
        }
        Self::from_nalgebra(DMatrix::from_row_slice(rows, cols, &entries))
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self, KernelError> {
        Self::from_row_major(rows, cols, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, KernelError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(KernelError::Shape { rows: r, cols: c, got: row.len() });
            }
            entries.extend_from_slice(row);
        }
        Self::from_row_major(r, c, entries)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, KernelError> {
        let rows: Vec<Vec<Complex64>> =
            rows.iter().map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn from_nalgebra(inner: DMatrix<Complex64>) -> Result<Self, KernelError> {
        for j in 0..inner.ncols() {
            for i in 0..inner.nrows() {
                let z = inner[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(KernelError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self { inner })
    }

    /// Wraps a matrix produced by finite arithmetic on finite inputs.
    ///
    /// Panics if an entry overflowed; internal callers only use this on
    /// products of bounded operands.
    pub(crate) fn wrap(inner: DMatrix<Complex64>) -> Self {
        Self::from_nalgebra(inner).expect("non-finite entry in internal matrix arithmetic")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { inner: DMatrix::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: DMatrix::identity(n, n) }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        Self::wrap(m)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn into_nalgebra(self) -> DMatrix<Complex64> {
        self.inner
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.rows()).map(|i| (0..self.cols()).map(|j| self.inner[(i, j)]).collect()).collect()
    }

    /// Returns a copy with one entry replaced.
    pub fn with_entry(&self, i: usize, j: usize, z: Complex64) -> Result<Self, KernelError> {
        let mut m = self.inner.clone();
        m[(i, j)] = z;
        Self::from_nalgebra(m)
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint() }
    }

    pub fn transpose(&self) -> Self {
        Self { inner: self.inner.transpose() }
    }

    pub fn conj(&self) -> Self {
        Self { inner: self.inner.map(|z| z.conj()) }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::wrap(&self.inner * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self, KernelError> {
        if self.cols() != rhs.rows() {
            return Err(KernelError::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Self::from_nalgebra(&self.inner * &rhs.inner)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, KernelError> {
        self.same_shape(rhs)?;
        Ok(Self::wrap(&self.inner + &rhs.inner))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, KernelError> {
        self.same_shape(rhs)?;
        Ok(Self::wrap(&self.inner - &rhs.inner))
    }

    fn same_shape(&self, rhs: &Self) -> Result<(), KernelError> {
        if self.rows() != rhs.rows() || self.cols() != rhs.cols() {
            return Err(KernelError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(())
    }

    /// `‖M‖_max`, the largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.inner.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        if self.rows() == 0 || self.cols() == 0 {
            return 0.0;
        }
        singular_values(self).first().copied().unwrap_or(0.0)
    }

    /// `‖M − M*‖_max`.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut r = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                r = r.max((self.inner[(i, j)] - self.inner[(j, i)].conj()).norm());
            }
        }
        r
    }

    pub fn is_hermitian(&self, rtol: f64) -> bool {
        self.is_square() && self.hermitian_residual() <= rtol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// `(M + M*)/2`.
    pub fn hermitian_part(&self) -> Result<Self, KernelError> {
        self.require_square()?;
        Ok(Self::wrap((&self.inner + self.inner.adjoint()) * Complex64::new(0.5, 0.0)))
    }

    pub fn require_square(&self) -> Result<(), KernelError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(KernelError::NonSquare { rows: self.rows(), cols: self.cols() })
        }
    }

    /// `(self | rhs)`.
    pub fn hstack(&self, rhs: &Self) -> Result<Self, KernelError> {
        if self.rows() != rhs.rows() {
            return Err(KernelError::DimensionMismatch("hstack row count".into()));
        }
        let mut m = DMatrix::zeros(self.rows(), self.cols() + rhs.cols());
        m.view_mut((0, 0), (self.rows(), self.cols())).copy_from(&self.inner);
        m.view_mut((0, self.cols()), (rhs.rows(), rhs.cols())).copy_from(&rhs.inner);
        Ok(Self { inner: m })
    }

    /// `(self ; rhs)`.
    pub fn vstack(&self, rhs: &Self) -> Result<Self, KernelError> {
        if self.cols() != rhs.cols() {
            return Err(KernelError::DimensionMismatch("vstack column count".into()));
        }
        let mut m = DMatrix::zeros(self.rows() + rhs.rows(), self.cols());
        m.view_mut((0, 0), (self.rows(), self.cols())).copy_from(&self.inner);
        m.view_mut((self.rows(), 0), (rhs.rows(), rhs.cols())).copy_from(&rhs.inner);
        Ok(Self { inner: m })
    }

    /// Contiguous block `[r0, r0+nr) x [c0, c0+nc)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Self { inner: self.inner.view((r0, c0), (nr, nc)).into_owned() }
    }

    /// Submatrix on the given row and column index sets.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut m = DMatrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m[(a, b)] = self.inner[(i, j)];
            }
        }
        Self { inner: m }
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.inner.column(j).iter().copied().collect()
    }

    pub fn inverse(&self) -> Result<Self, KernelError> {
        self.require_square()?;
        let inv = self.inner.clone().try_inverse().ok_or(KernelError::Singular)?;
        Self::from_nalgebra(inv).map_err(|_| KernelError::Singular)
    }

    /// Solves `self · X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self, KernelError> {
        self.require_square()?;
        let lu = self.inner.clone().lu();
        let x = lu.solve(&rhs.inner).ok_or(KernelError::Singular)?;
        Self::from_nalgebra(x).map_err(|_| KernelError::Singular)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols(), "vector length mismatch");
        (0..self.rows()).map(|i| (0..self.cols()).map(|j| self.inner[(i, j)] * v[j]).sum()).collect()
    }
}

/// Zero/positive/negative eigenvalue counts of a Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Inertia {
    pub n_zero: usize,
    pub n_plus: usize,
    pub n_minus: usize,
}

impl Inertia {
    pub fn new(n_zero: usize, n_plus: usize, n_minus: usize) -> Self {
        Self { n_zero, n_plus, n_minus }
    }

    pub fn dim(&self) -> usize {
        self.n_zero + self.n_plus + self.n_minus
    }
}

impl fmt::Display for Inertia {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n_zero, self.n_plus, self.n_minus)
    }
}

/// Default zero band for inertia: `1e-9 · max(1, ‖M‖_max)`.
pub fn default_zero_tol(m: &CMatrix) -> f64 {
    1e-9 * m.max_abs().max(1.0)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>, KernelError> {
    m.require_square()?;
    let residual = m.hermitian_residual();
    if residual > HERMITIAN_RTOL * m.max_abs().max(f64::MIN_POSITIVE) {
        return Err(KernelError::NotHermitian { residual });
    }
    if m.rows() == 0 {
        return Ok(Vec::new());
    }
    let sym = m.hermitian_part()?;
    let mut ev: Vec<f64> = sym.inner.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Ascending eigenvalues and matching orthonormal eigenvectors (as columns).
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix), KernelError> {
    m.require_square()?;
    let residual = m.hermitian_residual();
    if residual > HERMITIAN_RTOL * m.max_abs().max(f64::MIN_POSITIVE) {
        return Err(KernelError::NotHermitian { residual });
    }
    let n = m.rows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let eig = m.hermitian_part()?.inner.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, CMatrix::wrap(vecs)))
}

/// Inertia of a Hermitian matrix with an explicit zero band `tol_zero`.
pub fn hermitian_inertia(m: &CMatrix, tol_zero: f64) -> Result<Inertia, KernelError> {
    let ev = hermitian_eigenvalues(m)?;
    let mut inertia = Inertia::default();
    for mu in ev {
        if mu.abs() <= tol_zero {
            inertia.n_zero += 1;
        } else if mu > 0.0 {
            inertia.n_plus += 1;
        } else {
            inertia.n_minus += 1;
        }
    }
    Ok(inertia)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.inner.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values above `rel_tol · σ_max`; zero for the zero matrix.
pub fn rank_tol(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Orthonormal basis of the numerical kernel, `cols − rank_tol(M)` vectors.
pub fn null_space(m: &CMatrix, rel_tol: f64) -> Vec<Vec<Complex64>> {
    let (r, c) = (m.rows(), m.cols());
    if c == 0 {
        return Vec::new();
    }
    // Pad wide matrices so the SVD returns a full right basis.
    let padded = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(&m.inner);
        p
    } else {
        m.inner.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let rank = if smax == 0.0 { 0 } else { idx.iter().filter(|&&i| svd.singular_values[i] > rel_tol * smax).count() };
    idx[rank..]
        .iter()
        .map(|&i| v_t.row(i).iter().map(|z| z.conj()).collect())
        .collect()
}

/// Determinant via LU with partial pivoting.
pub fn determinant(m: &CMatrix) -> Result<Complex64, KernelError> {
    m.require_square()?;
    if m.rows() == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    Ok(m.inner.clone().lu().determinant())
}

/// `e^M` by Padé scaling and squaring.
pub fn matrix_exp(m: &CMatrix) -> Result<CMatrix, KernelError> {
    m.require_square()?;
    if m.rows() == 0 {
        return Ok(m.clone());
    }
    CMatrix::from_nalgebra(m.inner.exp())
}

/// Orthonormalizes the columns of a tall matrix by Gram–Schmidt with
/// re-orthogonalization. Returns `(Q, diag(R))`; the diagonal is real and
/// positive so `det R` is their product.
pub fn orthonormalize_columns(m: &CMatrix) -> Result<(CMatrix, Vec<f64>), KernelError> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut data: Vec<Complex64> = Vec::with_capacity(rows * cols);
    for j in 0..cols {
        data.extend(m.inner.column(j).iter().copied());
    }
    let diag = mgs_column_major(&mut data, rows, cols).ok_or(KernelError::Singular)?;
    let q = DMatrix::from_column_slice(rows, cols, &data);
    Ok((CMatrix::wrap(q), diag))
}

/// In-place modified Gram–Schmidt on column-major storage. Returns the
/// diagonal of R, or `None` on a (numerically) dependent column.
pub(crate) fn mgs_column_major(data: &mut [Complex64], rows: usize, cols: usize) -> Option<Vec<f64>> {
    let mut diag = Vec::with_capacity(cols);
    for j in 0..cols {
        for _pass in 0..2 {
            for i in 0..j {
                let (head, tail) = data.split_at_mut(j * rows);
                let qi = &head[i * rows..(i + 1) * rows];
                let vj = &mut tail[..rows];
                let mut r = Complex64::new(0.0, 0.0);
                for k in 0..rows {
                    r += qi[k].conj() * vj[k];
                }
                for k in 0..rows {
                    vj[k] -= r * qi[k];
                }
            }
        }
        let col = &mut data[j * rows..(j + 1) * rows];
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return None;
        }
        let inv = 1.0 / norm;
        for z in col.iter_mut() {
            *z *= inv;
        }
        diag.push(norm);
    }
    Some(diag)
}
