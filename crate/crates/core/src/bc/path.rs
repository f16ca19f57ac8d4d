//! Paths inside a stratum.
//!
//! `S_K = R* Ĵ R` with `Ĵ = diag(0, I, −I)`; two such factors are joined by
//! `R(τ) = Q₁ U(τ) ((1−τ)T₁ + τT₂)` where `R_j = Q_j T_j` is a QR factorization
//! and `U(τ)` runs from the identity to `Q₁* Q₂` through scaled Givens angles
//! and phases. Entries of `S` outside `K × K` move linearly.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::chart::ChartRepr;
use super::{chart_decompose, stratum_label, BcError, BoundaryCondition};
use crate::kernel::{default_zero_tol, hermitian_eigen, hermitian_inertia, orthonormalize_columns, CMatrix, Inertia};

/// A congruence factor `S_K ≈ R* Ĵ R` and its residual.
struct Factor {
    r: DMatrix<Complex64>,
    residual: DMatrix<Complex64>,
}

fn is_real(m: &CMatrix) -> bool {
    m.as_nalgebra().iter().all(|z| z.im == 0.0)
}

/// Ordered eigenpairs: zero band first, then positive, then negative.
fn factor(s_k: &CMatrix, tol: f64, real: bool) -> Factor {
    let m = s_k.rows();
    let (values, vecs): (Vec<f64>, DMatrix<Complex64>) = if real {
        let re = s_k.as_nalgebra().map(|z| z.re);
        let eig = ((&re + re.transpose()) * 0.5).symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let (v, e) = hermitian_eigen(s_k).expect("S_K is Hermitian");
        (v, e.into_nalgebra())
    };
    let class = |mu: f64| if mu.abs() <= tol { 0 } else if mu > 0.0 { 1 } else { 2 };
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&i| (class(values[i]), i));
    let mut r = DMatrix::zeros(m, m);
    let mut j_hat = vec![0.0; m];
    for (row, &i) in order.iter().enumerate() {
        let mu = values[i];
        let scale = if class(mu) == 0 { 1.0 } else { mu.abs().sqrt() };
        j_hat[row] = match class(mu) {
            0 => 0.0,
            1 => 1.0,
            _ => -1.0,
        };
        for col in 0..m {
            r[(row, col)] = vecs[(col, i)].conj() * scale;
        }
    }
    let recon = congruence(&r, &j_hat);
    let residual = s_k.as_nalgebra() - recon;
    Factor { r, residual }
}

fn j_hat_of(inertia: Inertia) -> Vec<f64> {
    let mut j = vec![0.0; inertia.n_zero];
    j.extend(std::iter::repeat_n(1.0, inertia.n_plus));
    j.extend(std::iter::repeat_n(-1.0, inertia.n_minus));
    j
}

fn congruence(r: &DMatrix<Complex64>, j_hat: &[f64]) -> DMatrix<Complex64> {
    let mut jr = r.clone();
    for (row, &j) in j_hat.iter().enumerate() {
        for col in 0..r.ncols() {
            jr[(row, col)] *= j;
        }
    }
    r.adjoint() * jr
}

/// A plane rotation `[[cos θ, −e^{−iφ} sin θ], [e^{iφ} sin θ, cos θ]]` on rows `(i, j)`.
#[derive(Debug, Clone, Copy)]
struct Rotation {
    i: usize,
    j: usize,
    theta: f64,
    phi: f64,
}

impl Rotation {
    fn apply_left(&self, m: &mut DMatrix<Complex64>, tau: f64) {
        let (s, c) = (self.theta * tau).sin_cos();
        let e = Complex64::from_polar(1.0, self.phi);
        for col in 0..m.ncols() {
            let x = m[(self.i, col)];
            let y = m[(self.j, col)];
            m[(self.i, col)] = x * c - e.conj() * s * y;
            m[(self.j, col)] = e * s * x + y * c;
        }
    }
}

/// Writes unitary `u` as `G₁ ⋯ G_k · diag(e^{iα})`. In the real case the
/// phases are ±1 and are returned as π-rotations on pairs.
fn givens_factor(u: &DMatrix<Complex64>, real: bool) -> (Vec<Rotation>, Vec<f64>) {
    let m = u.nrows();
    let mut work = u.clone();
    let mut rots = Vec::new();
    for col in 0..m {
        for row in (col + 1)..m {
            let x = work[(col, col)];
            let y = work[(row, col)];
            if y.norm() == 0.0 {
                continue;
            }
            let r = x.norm().hypot(y.norm());
            let rot = if real {
                Rotation { i: col, j: row, theta: y.re.atan2(x.re), phi: 0.0 }
            } else {
                let phi = if x.norm() == 0.0 { y.arg() } else { (y * x.conj()).arg() };
                Rotation { i: col, j: row, theta: (x.norm() / r).min(1.0).acos(), phi }
            };
            // Eliminate with the inverse rotation.
            let inv = Rotation { theta: -rot.theta, ..rot };
            inv.apply_left(&mut work, 1.0);
            rots.push(rot);
        }
    }
    let mut phases: Vec<f64> = (0..m).map(|i| work[(i, i)].arg()).collect();
    if real {
        let flipped: Vec<usize> = (0..m).filter(|&i| work[(i, i)].re < 0.0).collect();
        for pair in flipped.chunks(2) {
            if let [i, j] = *pair {
                rots.push(Rotation { i, j, theta: std::f64::consts::PI, phi: 0.0 });
                phases[i] = 0.0;
                phases[j] = 0.0;
            }
        }
    }
    (rots, phases)
}

fn unitary_at(rots: &[Rotation], phases: &[f64], tau: f64) -> DMatrix<Complex64> {
    let m = phases.len();
    let mut u = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        m,
        phases.iter().map(|&a| Complex64::from_polar(1.0, a * tau)),
    ));
    for rot in rots.iter().rev() {
        rot.apply_left(&mut u, tau);
    }
    u
}

fn qr(r: &DMatrix<Complex64>) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let (q, _) = orthonormalize_columns(&CMatrix::from_nalgebra(r.clone()).expect("finite factor"))
        .expect("congruence factor is invertible");
    let q = q.into_nalgebra();
    let mut t = q.adjoint() * r;
    for i in 0..t.nrows() {
        for j in 0..i {
            t[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    (q, t)
}

/// Point at `τ` of a path from chart coordinates `s1` to `s2` in chart `k`.
/// Both `S_K` blocks must have equal inertia under `tol_zero`.
pub fn connect_in_chart(
    k: &[usize],
    s1: &CMatrix,
    s2: &CMatrix,
    tau: f64,
    tol_zero: Option<f64>,
) -> Result<ChartRepr, BcError> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(BcError::TauOutOfRange(tau));
    }
    let c1 = ChartRepr::new(k.to_vec(), s1.clone())?;
    let c2 = ChartRepr::new(k.to_vec(), s2.clone())?;
    if c1.dim != c2.dim {
        return Err(BcError::Dimension("charts of different dimension".into()));
    }
    let (k1, k2) = (c1.s_k(), c2.s_k());
    let tol = tol_zero.unwrap_or_else(|| default_zero_tol(&k1).max(default_zero_tol(&k2)));
    let in1 = hermitian_inertia(&k1, tol)?;
    let in2 = hermitian_inertia(&k2, tol)?;
    if in1 != in2 {
        return Err(BcError::StrataMismatch(in1.to_string(), in2.to_string()));
    }
    let mut s = c1.s.as_nalgebra() * Complex64::new(1.0 - tau, 0.0) + c2.s.as_nalgebra() * Complex64::new(tau, 0.0);
    if !k.is_empty() {
        let real = is_real(&c1.s) && is_real(&c2.s);
        let f1 = factor(&k1, tol, real);
        let mut f2 = factor(&k2, tol, real);
        if real {
            let det1 = f1.r.map(|z| z.re).determinant();
            let det2 = f2.r.map(|z| z.re).determinant();
            if det1 * det2 < 0.0 {
                let mut row = f2.r.row_mut(0);
                row.neg_mut();
            }
        }
        let (q1, t1) = qr(&f1.r);
        let (q2, t2) = qr(&f2.r);
        let (rots, phases) = givens_factor(&(q1.adjoint() * &q2), real);
        let u = unitary_at(&rots, &phases, tau);
        let t = t1 * Complex64::new(1.0 - tau, 0.0) + t2 * Complex64::new(tau, 0.0);
        let r = q1 * u * t;
        let block = congruence(&r, &j_hat_of(in1))
            + f1.residual * Complex64::new(1.0 - tau, 0.0)
            + f2.residual * Complex64::new(tau, 0.0);
        for (a, &i) in k.iter().enumerate() {
            for (b, &j) in k.iter().enumerate() {
                s[(i, j)] = block[(a, b)];
            }
        }
    }
    let s = CMatrix::from_nalgebra(s)?.hermitian_part()?;
    ChartRepr::new(k.to_vec(), s)
}

/// Point at `τ` of a path joining two conditions with equal stratum labels.
pub fn connect_within_stratum(
    bc1: &BoundaryCondition,
    bc2: &BoundaryCondition,
    tau: f64,
    tol_zero: Option<f64>,
) -> Result<BoundaryCondition, BcError> {
    let l1 = stratum_label(bc1, tol_zero);
    let l2 = stratum_label(bc2, tol_zero);
    if l1 != l2 {
        return Err(BcError::StrataMismatch(l1.to_string(), l2.to_string()));
    }
    let c1 = chart_decompose(bc1);
    let c2 = chart_decompose(bc2);
    Ok(connect_in_chart(&c1.k, &c1.s, &c2.s, tau, tol_zero)?.compose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bc::{chart_compose, stratum_label_in};

    fn samples(k: &[usize], s1: &CMatrix, s2: &CMatrix) -> Vec<ChartRepr> {
        (0..=10).map(|i| connect_in_chart(k, s1, s2, i as f64 / 10.0, None).unwrap()).collect()
    }

    #[test]
    fn endpoints_are_reproduced() {
        let s1 = CMatrix::from_real_rows(&[vec![2.0, 0.5], vec![0.5, -1.0]]).unwrap();
        let s2 = CMatrix::from_real_rows(&[vec![-3.0, 1.0], vec![1.0, 0.2]]).unwrap();
        let p = samples(&[0, 1], &s1, &s2);
        assert!(p[0].s.sub(&s1).unwrap().max_abs() < 1e-12);
        assert!(p[10].s.sub(&s2).unwrap().max_abs() < 1e-12);
        for c in &p {
            assert_eq!(hermitian_inertia(&c.s_k(), 1e-9).unwrap(), Inertia::new(0, 1, 1));
            assert!(c.s.as_nalgebra().iter().all(|z| z.im == 0.0));
        }
    }

    #[test]
    fn positive_path_keeps_inertia() {
        let s1 = CMatrix::from_real_diagonal(&[1.0, 1.0]);
        let s2 = CMatrix::from_real_diagonal(&[4.0, 9.0]);
        let mid = connect_in_chart(&[0, 1], &s1, &s2, 0.5, None).unwrap();
        assert_eq!(hermitian_inertia(&mid.s_k(), 1e-9).unwrap(), Inertia::new(0, 2, 0));
    }

    #[test]
    fn mixed_sign_path_keeps_inertia() {
        let s1 = CMatrix::from_real_diagonal(&[1.0, -1.0]);
        let s2 = CMatrix::from_real_diagonal(&[2.0, -3.0]);
        for c in samples(&[0, 1], &s1, &s2) {
            assert_eq!(hermitian_inertia(&c.s_k(), 1e-9).unwrap(), Inertia::new(0, 1, 1));
        }
    }

    #[test]
    fn complex_path_with_zero_block() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        // Rank-one blocks with kernels in different directions.
        let s1 = CMatrix::from_rows(&[
            vec![one, i, z, z],
            vec![-i, one, z, z],
            vec![z, z, one * 0.3, z],
            vec![z, z, z, -one],
        ])
        .unwrap();
        let s2 = CMatrix::from_rows(&[
            vec![one * 2.0, z, one, z],
            vec![z, one * 0.7, z, z],
            vec![one, z, one * 0.5, z],
            vec![z, z, z, one * 5.0],
        ])
        .unwrap();
        let k = [0, 1, 2];
        let t1 = hermitian_inertia(&s1.select(&k, &k), 1e-9).unwrap();
        let t2 = hermitian_inertia(&s2.select(&k, &k), 1e-9).unwrap();
        assert_eq!(t1, t2);
        let p = samples(&k, &s1, &s2);
        assert!(p[0].s.sub(&s1).unwrap().max_abs() < 1e-12);
        assert!(p[10].s.sub(&s2).unwrap().max_abs() < 1e-12);
        for c in &p {
            assert_eq!(hermitian_inertia(&c.s_k(), 1e-9).unwrap(), t1);
        }
    }

    #[test]
    fn within_stratum_on_conditions() {
        let bc1 = chart_compose(&[0, 1], &CMatrix::from_real_diagonal(&[1.0, -1.0])).unwrap();
        let bc2 = chart_compose(&[0, 1], &CMatrix::from_real_diagonal(&[2.0, -3.0])).unwrap();
        let label = stratum_label_in(&bc1, &[0, 1], None).unwrap();
        for i in 0..=10 {
            let bc = connect_within_stratum(&bc1, &bc2, i as f64 / 10.0, None).unwrap();
            assert_eq!(stratum_label_in(&bc, &[0, 1], None).unwrap(), label);
        }
        let same = connect_within_stratum(&bc1, &bc1, 0.37, None).unwrap();
        assert!(same.same_as(&bc1));
        let other = BoundaryCondition::dirichlet(1);
        assert!(matches!(connect_within_stratum(&bc1, &other, 0.5, None), Err(BcError::StrataMismatch(..))));
        assert!(matches!(connect_within_stratum(&bc1, &bc2, 1.5, None), Err(BcError::TauOutOfRange(_))));
    }
}
