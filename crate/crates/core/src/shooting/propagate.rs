//! Fundamental matrices by exact per-piece exponentials.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ShootingError;
use crate::kernel::CMatrix;
use crate::model::{CoefficientField, Piece};

/// Boundary traces of the `2d` fundamental solutions with identity data at `a`.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub lambda: Complex64,
    /// `[−φ(a); φ(b)]`.
    pub phi: CMatrix,
    /// `[Pφ'(a); Pφ'(b)]`.
    pub psi: CMatrix,
    /// Transfer matrix from `(y, Py')(a)` to `(y, Py')(b)`.
    pub transfer: CMatrix,
}

/// First-order generator `[[0, P⁻¹], [Q − λW, 0]]` of `(y, Py')`.
pub(crate) fn generator(piece: &Piece, lambda: Complex64) -> DMatrix<Complex64> {
    let d = piece.p.nrows();
    let mut g = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            g[(i, d + j)] = Complex64::new(piece.p_inv()[(i, j)], 0.0);
            g[(d + i, j)] = Complex64::new(piece.q[(i, j)], 0.0) - lambda * piece.w[(i, j)];
        }
    }
    g
}

/// Transfer matrix across the whole interval; fails if entries overflow.
pub fn transfer_matrix(field: &CoefficientField, lambda: Complex64) -> Result<CMatrix, ShootingError> {
    let n = 2 * field.dim();
    let mut m = DMatrix::<Complex64>::identity(n, n);
    let bp = field.breakpoints();
    for (k, piece) in field.pieces().iter().enumerate() {
        let h = bp[k + 1] - bp[k];
        let step = (generator(piece, lambda) * Complex64::new(h, 0.0)).exp();
        m = step * m;
    }
    CMatrix::from_nalgebra(m).map_err(|_| ShootingError::Overflow { lambda })
}

/// `Φ_λ`, `Ψ_λ` and the transfer matrix.
pub fn propagate(field: &CoefficientField, lambda: Complex64) -> Result<Propagation, ShootingError> {
    let d = field.dim();
    let n = 2 * d;
    let transfer = transfer_matrix(field, lambda)?;
    let mut phi = DMatrix::zeros(n, n);
    let mut psi = DMatrix::zeros(n, n);
    for i in 0..d {
        phi[(i, i)] = Complex64::new(-1.0, 0.0);
        psi[(i, d + i)] = Complex64::new(1.0, 0.0);
        for j in 0..n {
            phi[(d + i, j)] = transfer.get(i, j);
            psi[(d + i, j)] = transfer.get(d + i, j);
        }
    }
    Ok(Propagation {
        lambda,
        phi: CMatrix::from_nalgebra(phi).map_err(|_| ShootingError::Overflow { lambda })?,
        psi: CMatrix::from_nalgebra(psi).map_err(|_| ShootingError::Overflow { lambda })?,
        transfer,
    })
}

/// `‖M(λ̄)* J M(λ) − J‖_max` with `J = [[0, −I], [I, 0]]`.
pub fn lagrange_residual(field: &CoefficientField, lambda: Complex64) -> Result<f64, ShootingError> {
    let d = field.dim();
    let n = 2 * d;
    let m = transfer_matrix(field, lambda)?;
    let mb = transfer_matrix(field, lambda.conj())?;
    let mut j = DMatrix::zeros(n, n);
    for i in 0..d {
        j[(i, d + i)] = Complex64::new(-1.0, 0.0);
        j[(d + i, i)] = Complex64::new(1.0, 0.0);
    }
    let lhs = mb.as_nalgebra().adjoint() * &j * m.as_nalgebra();
    Ok((lhs - j).iter().fold(0.0, |acc, z| acc.max(z.norm())))
}
