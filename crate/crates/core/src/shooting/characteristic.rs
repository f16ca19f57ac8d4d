//! Overflow-safe evaluation of `Γ(λ) = det(AΦ_λ + BΨ_λ)`.
//!
//! With state `x = (y, Py')`, `Γ(λ) = det(C₀ x-frame(a) + C₁ x-frame(b))` where
//! `C₀ = [−A_L | B_L]` and `C₁ = [A_R | B_R]` split `A`, `B` into their first
//! and last `d` columns. The stacked frame `[Z(a); Z(b)]` starts at `[I; I]`
//! and is carried through balanced sub-steps, re-orthonormalized after each
//! one; the discarded triangular factors are accumulated as a log scale.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::propagate::generator;
use super::ShootingError;
use crate::bc::BoundaryCondition;
use crate::kernel::mgs_column_major;
use crate::model::CoefficientField;

/// Bound on `‖G̃‖_F · h` for one balanced sub-step.
const STEP_NORM: f64 = 4.0;

/// Pieces needing more sub-steps than this go through their eigenbasis.
const STIFF_STEPS: usize = 8;

/// Largest accepted condition number of the eigenvector matrix of `P⁻¹(Q − λW)`.
const MODE_COND: f64 = 1e8;

/// `mantissa · exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledValue {
    pub mantissa: Complex64,
    pub log_scale: f64,
}

impl ScaledValue {
    pub fn is_zero(&self) -> bool {
        self.mantissa.norm() == 0.0
    }

    /// `ln |value|`, `−∞` for zero.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.log_scale
    }

    pub fn arg(&self) -> f64 {
        self.mantissa.arg()
    }

    /// The plain complex value; may be infinite or zero when out of range.
    pub fn value(&self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }

    /// Principal argument of `other / self`.
    pub fn arg_to(&self, other: &ScaledValue) -> f64 {
        (other.mantissa * self.mantissa.conj()).arg()
    }
}

/// Final frame at `λ`, in natural coordinates up to a common right factor.
#[derive(Debug, Clone)]
pub struct Frame {
    pub value: ScaledValue,
    /// `C₀ Z(a) + C₁ Z(b)`, the characteristic matrix times an invertible factor.
    pub matrix: DMatrix<Complex64>,
    /// `Z(a)` in natural coordinates; maps kernel vectors of `matrix` to initial data.
    pub initial: DMatrix<Complex64>,
}

/// Evaluator of `Γ` for one field and boundary condition.
#[derive(Debug, Clone)]
pub struct Characteristic<'a> {
    field: &'a CoefficientField,
    c0: DMatrix<Complex64>,
    c1: DMatrix<Complex64>,
    lengths: Vec<f64>,
}

impl<'a> Characteristic<'a> {
    pub fn new(field: &'a CoefficientField, bc: &BoundaryCondition) -> Result<Self, ShootingError> {
        let d = field.dim();
        if bc.dim() != d {
            return Err(ShootingError::DimensionMismatch { field: d, bc: bc.dim() });
        }
        let n = 2 * d;
        let a = bc.a().as_nalgebra();
        let b = bc.b().as_nalgebra();
        let mut c0 = DMatrix::zeros(n, n);
        let mut c1 = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..d {
                c0[(i, j)] = -a[(i, j)];
                c0[(i, d + j)] = b[(i, j)];
                c1[(i, j)] = a[(i, d + j)];
                c1[(i, d + j)] = b[(i, d + j)];
            }
        }
        let lengths = field.breakpoints().windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self { field, c0, c1, lengths })
    }

    pub fn field(&self) -> &CoefficientField {
        self.field
    }

    pub fn eval(&self, lambda: Complex64) -> ScaledValue {
        self.frame(lambda).value
    }

    /// Propagates the stacked frame and returns the characteristic matrix.
    pub fn frame(&self, lambda: Complex64) -> Frame {
        self.frame_with(lambda, true)
    }

    fn frame_with(&self, lambda: Complex64, stiff: bool) -> Frame {
        let d = self.field.dim();
        let n = 2 * d;
        let pieces = self.field.pieces();

        // Balance y against Py' with a single scale for all pieces.
        let mut pot: f64 = 0.0;
        let mut pinv: f64 = 0.0;
        for pc in pieces {
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    s += (Complex64::new(pc.q[(i, j)], 0.0) - lambda * pc.w[(i, j)]).norm_sqr();
                }
            }
            pot = pot.max(s.sqrt());
            pinv = pinv.max(pc.p_inv().norm());
        }
        let sigma = if pot > 0.0 { (pot / pinv).sqrt().clamp(1e-150, 1e150) } else { 1.0 };

        // Column-major 2n × n frame; rows 0..n are Z(a), rows n..2n are Z(b).
        let rows = 2 * n;
        let mut f = vec![Complex64::new(0.0, 0.0); rows * n];
        for j in 0..n {
            let dj = if j < d { 1.0 } else { 1.0 / sigma };
            f[j * rows + j] = Complex64::new(dj, 0.0);
            f[j * rows + n + j] = Complex64::new(dj, 0.0);
        }
        let mut log_scale = 0.0;
        let mut flips = 0usize;
        let renorm = |f: &mut [Complex64], log_scale: &mut f64| {
            let diag = mgs_column_major(f, rows, n).expect("frame columns stay independent");
            *log_scale += diag.iter().map(|x| x.ln()).sum::<f64>();
        };
        renorm(&mut f, &mut log_scale);

        let mut tmp = vec![Complex64::new(0.0, 0.0); n * n];
        for (pc, &len) in pieces.iter().zip(&self.lengths) {
            let mut g = generator(pc, lambda);
            for i in 0..d {
                for j in 0..d {
                    g[(i, d + j)] *= sigma;
                    g[(d + i, j)] /= sigma;
                }
            }
            let gnorm = g.norm();
            let steps = ((gnorm * len / STEP_NORM).ceil() as usize).max(1);
            if stiff && steps > STIFF_STEPS {
                if let Some(modes) = Modes::new(pc, lambda, sigma, len) {
                    modes.advance(&mut f, rows, len, &mut log_scale, &mut flips);
                    renorm(&mut f, &mut log_scale);
                    continue;
                }
            }
            let h = len / steps as f64;
            let t = (g * Complex64::new(h, 0.0)).exp();
            for _ in 0..steps {
                for j in 0..n {
                    let col = &f[j * rows + n..j * rows + rows];
                    for i in 0..n {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for k in 0..n {
                            acc += t[(i, k)] * col[k];
                        }
                        tmp[j * n + i] = acc;
                    }
                }
                for j in 0..n {
                    f[j * rows + n..j * rows + rows].copy_from_slice(&tmp[j * n..(j + 1) * n]);
                }
                renorm(&mut f, &mut log_scale);
            }
        }

        // Back to natural coordinates: x = D x̃ with D = diag(I, σI).
        let mut za = DMatrix::zeros(n, n);
        let mut zb = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                let di = if i < d { 1.0 } else { sigma };
                za[(i, j)] = f[j * rows + i] * di;
                zb[(i, j)] = f[j * rows + n + i] * di;
            }
        }
        let matrix = &self.c0 * &za + &self.c1 * &zb;
        let mut det = matrix.clone().lu().determinant();
        if flips % 2 == 1 {
            det = -det;
        }
        Frame { value: ScaledValue { mantissa: det, log_scale }, matrix, initial: za }
    }
}

/// Eigen-decomposition of a constant piece's balanced generator.
///
/// With `P⁻¹(Q − λW) X = X diag(ν)` and `μ = √ν` (`Re μ ≥ 0`), the balanced
/// generator has eigenvectors `[x; ±μPx/σ]`, so
/// `V = [[X, X], [Y, −Y]]` and `V⁻¹ = ½[[X⁻¹, Y⁻¹], [X⁻¹, −Y⁻¹]]`.
struct Modes {
    mu: Vec<Complex64>,
    x: DMatrix<Complex64>,
    x_inv: DMatrix<Complex64>,
    y: DMatrix<Complex64>,
    y_inv: DMatrix<Complex64>,
}

impl Modes {
    fn new(pc: &crate::model::Piece, lambda: Complex64, sigma: f64, len: f64) -> Option<Self> {
        let d = pc.p.nrows();
        let pinv = pc.p_inv().map(|v| Complex64::new(v, 0.0));
        let p = pc.p.map(|v| Complex64::new(v, 0.0));
        let pot = DMatrix::from_fn(d, d, |i, j| Complex64::new(pc.q[(i, j)], 0.0) - lambda * pc.w[(i, j)]);
        let m = &pinv * pot;
        let (nu, x) = eigenvectors(m)?;
        let x_inv = x.clone().try_inverse()?;
        if x.norm() * x_inv.norm() > MODE_COND * d as f64 {
            return None;
        }
        let mu: Vec<Complex64> = nu.iter().map(|v| v.sqrt()).collect();
        let top = mu.iter().map(|m| m.norm()).fold(0.0, f64::max);
        let bottom = mu.iter().map(|m| m.norm()).fold(f64::INFINITY, f64::min);
        if bottom * len < 1.0 || bottom < 1e-3 * top {
            return None;
        }
        let y = DMatrix::from_fn(d, d, |i, j| (&p * &x)[(i, j)] * mu[j] / sigma);
        let xp = &x_inv * &pinv;
        let y_inv = DMatrix::from_fn(d, d, |i, j| xp[(i, j)] * sigma / mu[i]);
        Some(Self { mu, x, x_inv, y, y_inv })
    }

    /// Carries the bottom half of the stacked frame across a piece of length
    /// `len`. Column operations are exact up to the swaps counted in `flips`
    /// and the scales added to `log_scale`.
    fn advance(&self, f: &mut [Complex64], rows: usize, len: f64, log_scale: &mut f64, flips: &mut usize) {
        let d = self.mu.len();
        let n = 2 * d;
        let zero = Complex64::new(0.0, 0.0);
        // Work rows: Z(a), growing coefficients, decaying coefficients.
        let mut w = vec![zero; rows * n];
        for j in 0..n {
            let col = &f[j * rows..(j + 1) * rows];
            let out = &mut w[j * rows..(j + 1) * rows];
            out[..n].copy_from_slice(&col[..n]);
            for k in 0..d {
                let mut u = zero;
                let mut v = zero;
                for l in 0..d {
                    u += self.x_inv[(k, l)] * col[n + l];
                    v += self.y_inv[(k, l)] * col[n + d + l];
                }
                out[n + k] = (u + v) * 0.5;
                out[n + d + k] = (u - v) * 0.5;
            }
        }

        // Clear the growing rows from the last d columns.
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| self.mu[b].re.total_cmp(&self.mu[a].re));
        for (k, &r) in order.iter().enumerate() {
            let r = n + r;
            let piv = (k..n).max_by(|&a, &b| w[a * rows + r].norm().total_cmp(&w[b * rows + r].norm())).unwrap();
            if w[piv * rows + r].norm() == 0.0 {
                continue;
            }
            if piv != k {
                for i in 0..rows {
                    w.swap(piv * rows + i, k * rows + i);
                }
                *flips += 1;
            }
            let pivot = w[k * rows + r];
            for c in k + 1..n {
                let factor = w[c * rows + r] / pivot;
                if factor.norm() == 0.0 {
                    continue;
                }
                for i in 0..rows {
                    let v = w[k * rows + i];
                    w[c * rows + i] -= factor * v;
                }
                w[c * rows + r] = zero;
            }
        }

        // Apply e^{±μ len} per row, with a per-column shift kept in log form.
        let growth = |i: usize| -> Complex64 {
            if i < n {
                zero
            } else if i < n + d {
                self.mu[i - n] * len
            } else {
                -self.mu[i - n - d] * len
            }
        };
        for j in 0..n {
            let col = &mut w[j * rows..(j + 1) * rows];
            let mut shift = f64::NEG_INFINITY;
            for (i, v) in col.iter().enumerate() {
                if v.norm() > 0.0 {
                    shift = shift.max(v.norm().ln() + growth(i).re);
                }
            }
            if !shift.is_finite() {
                continue;
            }
            for (i, v) in col.iter_mut().enumerate() {
                if v.norm() > 0.0 {
                    *v *= (growth(i) - shift).exp();
                }
            }
            *log_scale += shift;
        }

        for j in 0..n {
            let src = &w[j * rows..(j + 1) * rows];
            let mut out = vec![zero; n];
            for i in 0..d {
                for k in 0..d {
                    out[i] += self.x[(i, k)] * (src[n + k] + src[n + d + k]);
                    out[d + i] += self.y[(i, k)] * (src[n + k] - src[n + d + k]);
                }
            }
            let col = &mut f[j * rows..(j + 1) * rows];
            col[..n].copy_from_slice(&src[..n]);
            col[n..].copy_from_slice(&out);
        }
    }
}

/// Eigenvalues and unit eigenvectors from a complex Schur form; `None` when
/// Schur fails or the matrix looks defective.
fn eigenvectors(m: DMatrix<Complex64>) -> Option<(Vec<Complex64>, DMatrix<Complex64>)> {
    let d = m.nrows();
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let (q, t) = nalgebra::linalg::Schur::try_new(m, 1e-15, 10_000)?.unpack();
    let tiny = 1e-12 * scale;
    let mut v = DMatrix::zeros(d, d);
    for k in 0..d {
        v[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut num = Complex64::new(0.0, 0.0);
            for j in i + 1..=k {
                num += t[(i, j)] * v[(j, k)];
            }
            let den = t[(i, i)] - t[(k, k)];
            if den.norm() <= tiny {
                if num.norm() <= tiny {
                    continue;
                }
                return None;
            }
            v[(i, k)] = -num / den;
        }
    }
    let mut x = q * v;
    for mut c in x.column_iter_mut() {
        let s = c.norm();
        c /= Complex64::new(s, 0.0);
    }
    Some(((0..d).map(|k| t[(k, k)]).collect(), x))
}

/// `Γ(λ)` as a plain complex number; fails when it leaves the `f64` range.
pub fn gamma(field: &CoefficientField, bc: &BoundaryCondition, lambda: Complex64) -> Result<Complex64, ShootingError> {
    let v = Characteristic::new(field, bc)?.eval(lambda).value();
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(ShootingError::Overflow { lambda })
    }
}

/// `Γ(λ)` in scaled form.
pub fn gamma_scaled(field: &CoefficientField, bc: &BoundaryCondition, lambda: Complex64) -> Result<ScaledValue, ShootingError> {
    Ok(Characteristic::new(field, bc)?.eval(lambda))
}
