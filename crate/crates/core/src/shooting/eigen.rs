//! Geometric multiplicity and normalized eigenfunctions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::characteristic::Characteristic;
use super::propagate::generator;
use super::ShootingError;
use crate::bc::BoundaryCondition;
use crate::kernel::{null_space, rank_tol, CMatrix};
use crate::model::CoefficientField;

/// Relative singular-value threshold for the characteristic matrix kernel.
pub const KERNEL_RTOL: f64 = 1e-8;
const STEP_NORM: f64 = 4.0;

/// A sampled eigenfunction with its exact boundary trace.
#[derive(Debug, Clone)]
pub struct Eigenfunction {
    pub lambda: f64,
    pub t: Vec<f64>,
    /// `y(t_i)`, each of length `d`.
    pub y: Vec<Vec<Complex64>>,
    /// `(−y(a), y(b), Py'(a), Py'(b))`.
    pub trace: Vec<Complex64>,
}

/// `2d − rank` of the characteristic matrix at `λ*`.
pub fn geometric_multiplicity(field: &CoefficientField, bc: &BoundaryCondition, lambda_star: f64) -> Result<usize, ShootingError> {
    let frame = Characteristic::new(field, bc)?.frame(Complex64::new(lambda_star, 0.0));
    let m = CMatrix::from_nalgebra(frame.matrix)?;
    Ok(m.cols() - rank_tol(&m, KERNEL_RTOL))
}

/// `exp(Gh)` and `∫₀ʰ exp(G*s) M exp(Gs) ds` with `M = diag(W, 0)`, by one
/// block exponential.
fn step_with_gram(g: &DMatrix<Complex64>, w: &DMatrix<f64>, h: f64) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let n = g.nrows();
    let d = w.nrows();
    let mut big = DMatrix::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(&(-g.adjoint()));
    big.view_mut((n, n), (n, n)).copy_from(g);
    for i in 0..d {
        for j in 0..d {
            big[(i, n + j)] = Complex64::new(w[(i, j)], 0.0);
        }
    }
    let e = (big * Complex64::new(h, 0.0)).exp();
    let f12 = e.view((0, n), (n, n)).clone_owned();
    let f22 = e.view((n, n), (n, n)).clone_owned();
    let gram = f22.adjoint() * f12;
    (f22, gram)
}

/// Normalized eigenfunction number `kernel_index` at `λ*` on `samples` uniform points plus breakpoints.
///
/// The state is rescaled after every sub-step, so eigenfunctions of very
/// negative eigenvalues do not overflow; forward propagation loses accuracy
/// when the eigenfunction decays strongly from `a`.
pub fn eigenfunction(
    field: &CoefficientField,
    bc: &BoundaryCondition,
    lambda_star: f64,
    kernel_index: usize,
    samples: usize,
) -> Result<Eigenfunction, ShootingError> {
    let d = field.dim();
    let n = 2 * d;
    let lam = Complex64::new(lambda_star, 0.0);
    let frame = Characteristic::new(field, bc)?.frame(lam);
    let kernel = null_space(&CMatrix::from_nalgebra(frame.matrix.clone())?, KERNEL_RTOL);
    if kernel_index >= kernel.len() {
        return Err(ShootingError::IndexOutOfRange { index: kernel_index, available: kernel.len() });
    }
    let v = DVector::from_vec(kernel[kernel_index].clone());
    let mut x: DVector<Complex64> = &frame.initial * v;

    let bp = field.breakpoints();
    let samples = samples.max(2);
    let mut grid: Vec<f64> = (0..samples).map(|i| field.a() + field.length() * i as f64 / (samples - 1) as f64).collect();
    grid.extend_from_slice(bp);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|p, q| (*p - *q).abs() <= 1e-14 * field.length());
    let last = grid.len() - 1;
    grid[last] = field.b();

    // Running state is x·exp(ls) with ‖x‖ = 1.
    let mut ls = x.norm().ln();
    x /= Complex64::new(x.norm(), 0.0);
    let mut states = vec![(x.clone(), ls)];
    // Norm² contributions as (value, log scale).
    let mut parts: Vec<(f64, f64)> = Vec::new();
    for i in 0..last {
        let (t0, t1) = (grid[i], grid[i + 1]);
        let piece = &field.pieces()[field.piece_index(0.5 * (t0 + t1))];
        let g = generator(piece, lam);
        let span = t1 - t0;
        let steps = ((g.norm() * span / STEP_NORM).ceil() as usize).max(1);
        let (e, gram) = step_with_gram(&g, &piece.w, span / steps as f64);
        for _ in 0..steps {
            let q = (x.adjoint() * &gram * &x)[(0, 0)].re;
            parts.push((q, 2.0 * ls));
            x = &e * x;
            let nx = x.norm();
            x /= Complex64::new(nx, 0.0);
            ls += nx.ln();
        }
        states.push((x.clone(), ls));
    }
    let top = parts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = parts.iter().map(|&(q, l)| q * (l - top).exp()).sum();
    let ln_norm = 0.5 * (total.ln() + top);

    let scaled = |(s, l): &(DVector<Complex64>, f64)| -> Vec<Complex64> {
        let f = (l - ln_norm).exp();
        s.iter().map(|z| z * f).collect()
    };
    let start = scaled(&states[0]);
    let end = scaled(&states[last]);
    let mut trace = Vec::with_capacity(2 * n);
    trace.extend(start[..d].iter().map(|z| -z));
    trace.extend_from_slice(&end[..d]);
    trace.extend_from_slice(&start[d..]);
    trace.extend_from_slice(&end[d..]);

    // Phase: first boundary value of (y(a), y(b), Py'(a), Py'(b)) that is not negligible becomes positive.
    let biggest = trace.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let phase_tol = 1e-6 * biggest;
    let unsigned = |k: usize| if k < d { -trace[k] } else { trace[k] };
    let rot = (0..2 * n)
        .map(unsigned)
        .find(|z| z.norm() > phase_tol)
        .map(|z| z.conj() / z.norm())
        .unwrap_or(Complex64::new(1.0, 0.0));
    for z in trace.iter_mut() {
        *z *= rot;
    }
    let y = states.iter().map(|s| scaled(s)[..d].iter().map(|z| z * rot).collect()).collect();
    Ok(Eigenfunction { lambda: lambda_star, t: grid, y, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{decoupled_field, ScalarCoefficients};
    use std::f64::consts::PI;

    fn unit() -> CoefficientField {
        CoefficientField::scalar(0.0, 1.0, 1.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn geometric_multiplicities() {
        let f = unit();
        let bc = BoundaryCondition::dirichlet(1);
        assert_eq!(geometric_multiplicity(&f, &bc, PI * PI).unwrap(), 1);
        assert_eq!(geometric_multiplicity(&f, &bc, 5.0).unwrap(), 0);
        let c = ScalarCoefficients::new(1.0, 0.0, 1.0);
        let f2 = decoupled_field(vec![0.0, 1.0], &[vec![c], vec![c]]).unwrap();
        assert_eq!(geometric_multiplicity(&f2, &BoundaryCondition::dirichlet(2), PI * PI).unwrap(), 2);
    }

    #[test]
    fn dirichlet_eigenfunction() {
        let ef = eigenfunction(&unit(), &BoundaryCondition::dirichlet(1), PI * PI, 0, 101).unwrap();
        let s2 = 2f64.sqrt();
        for (t, y) in ef.t.iter().zip(&ef.y) {
            assert!((y[0] - Complex64::new(s2 * (PI * t).sin(), 0.0)).norm() < 1e-9, "t={t}");
        }
        let want = [0.0, 0.0, s2 * PI, -s2 * PI];
        for (z, w) in ef.trace.iter().zip(want) {
            assert!((z - Complex64::new(w, 0.0)).norm() < 1e-9, "{z} vs {w}");
        }
    }

    #[test]
    fn neumann_eigenfunction() {
        let ef = eigenfunction(&unit(), &BoundaryCondition::neumann(1), 0.0, 0, 11).unwrap();
        for y in &ef.y {
            assert!((y[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        let want = [-1.0, 1.0, 0.0, 0.0];
        for (z, w) in ef.trace.iter().zip(want) {
            assert!((z - Complex64::new(w, 0.0)).norm() < 1e-12);
        }
        assert!(matches!(
            eigenfunction(&unit(), &BoundaryCondition::neumann(1), 0.0, 1, 11),
            Err(ShootingError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn weighted_norm_is_one() {
        // Two pieces with different weights; trapezoid check of ∫ y*Wy on a fine grid.
        let c1 = ScalarCoefficients::new(1.0, 0.0, 2.0);
        let c2 = ScalarCoefficients::new(2.0, 1.0, 0.5);
        let f = decoupled_field(vec![0.0, 0.3, 1.0], &[vec![c1, c2]]).unwrap();
        let bc = BoundaryCondition::dirichlet(1);
        let lam = super::super::locate_eigenvalues(&f, &bc, 0.0, 60.0, 1e-12).unwrap().eigenvalues[0].0;
        let ef = eigenfunction(&f, &bc, lam, 0, 20001).unwrap();
        let mut integral = 0.0;
        for i in 0..ef.t.len() - 1 {
            let (t0, t1) = (ef.t[i], ef.t[i + 1]);
            let w = if 0.5 * (t0 + t1) < 0.3 { 2.0 } else { 0.5 };
            integral += 0.5 * (t1 - t0) * w * (ef.y[i][0].norm_sqr() + ef.y[i + 1][0].norm_sqr());
        }
        assert!((integral - 1.0).abs() < 1e-6, "{integral}");
    }
}
