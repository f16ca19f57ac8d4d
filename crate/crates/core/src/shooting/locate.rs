//! Eigenvalue location by recursive contour counting.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::contour::{ContourConfig, CountReport, Counter};
use super::{Endpoint, ShootingError};
use crate::bc::BoundaryCondition;
use crate::kernel::{hermitian_eigenvalues, null_space, CMatrix};
use crate::model::CoefficientField;

/// Lower bounds below this are reported as [`ShootingError::SearchExhausted`].
pub const SEARCH_FLOOR: f64 = -1.0e9;
/// Relative resolution below which `Γ` evaluations cannot separate zeros.
pub const RELATIVE_FLOOR: f64 = 1e-13;
const NUDGE_TRIES: usize = 8;
const MAX_STEPS_PER_CLUSTER: usize = 400;
const ZOOM_FACTOR: f64 = 64.0;
const SPLIT_OFFSETS: [f64; 7] = [0.0, 0.137, -0.137, 0.291, -0.291, 0.053, -0.053];

/// Eigenvalues found in an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSlice {
    /// Interval actually counted; differs from the request when an endpoint was nudged.
    pub r1: f64,
    pub r2: f64,
    /// Increasing values with their analytic multiplicities.
    pub eigenvalues: Vec<(f64, usize)>,
    /// Whether the requested endpoints were certified without nudging.
    pub certified: bool,
    pub total: usize,
    pub evaluations: usize,
}

impl SpectrumSlice {
    /// Values repeated according to multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        self.eigenvalues.iter().flat_map(|&(v, m)| std::iter::repeat_n(v, m)).collect()
    }
}

/// How to find a lower end for the search of the lowest eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SearchPolicy {
    /// Quadratic-form bound from the coefficients and the boundary condition.
    #[default]
    FormBound,
    /// Doubling scan `L ← l0 − 2^k·step` until `(L − guard, L)` is empty.
    Doubling { l0: f64, step: f64, guard: f64, max_steps: usize },
    /// A caller-supplied lower bound.
    Fixed(f64),
}

impl SearchPolicy {
    pub fn doubling() -> Self {
        SearchPolicy::Doubling { l0: 0.0, step: 10.0, guard: 5.0, max_steps: 40 }
    }
}

/// Lower bound for the spectrum from the quadratic form.
///
/// With `(A|B)` row-orthonormal and `B = UΣV*` of rank `r`, admissible traces
/// have `ρ ∈ range(V_r) ∩ ker(U₀*A)` and `ρ*η = −ρ*Mρ` with
/// `M = V_r Σ_r⁻¹ U_r*A`. Only the negative part `c = max(0, −λ_min(M))` on
/// that subspace can lower the form, and the trace inequality
/// `|y(a)|² + |y(b)|² ≤ 2‖y‖²/ℓ + 4‖y‖‖y'‖` gives
/// `λ₁ ≥ −(q⁻ + 2c/ℓ + 4c²/μ₁)/μ₂`.
pub fn spectral_lower_bound(field: &CoefficientField, bc: &BoundaryCondition) -> f64 {
    let c = robin_negative_part(bc);
    let bracket = field.q_minus() + 2.0 * c / field.length() + 4.0 * c * c / field.mu1();
    -bracket / field.mu2() - 1.0
}

fn robin_negative_part(bc: &BoundaryCondition) -> f64 {
    let nb = bc.normalized();
    let a = nb.a().as_nalgebra();
    let b = nb.b().as_nalgebra();
    let n = a.nrows();
    let svd = b.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v = svd.v_t.expect("right singular vectors requested").adjoint();
    let sv = &svd.singular_values;
    let range: Vec<usize> = (0..n).filter(|&i| sv[i] > 1e-9).collect();
    let null: Vec<usize> = (0..n).filter(|&i| sv[i] <= 1e-9).collect();
    if range.is_empty() {
        return 0.0;
    }
    let ua = u.adjoint() * a;
    let v_r = v.select_columns(&range);
    let m = &v_r * DMatrix::from_fn(range.len(), n, |i, j| ua[(range[i], j)] / sv[range[i]]);
    // Admissible coefficients x with ρ = V_r x.
    let basis = if null.is_empty() {
        DMatrix::identity(range.len(), range.len())
    } else {
        let constraint = ua.select_rows(&null) * &v_r;
        let cols = null_space(&CMatrix::from_nalgebra(constraint).expect("finite"), 1e-9);
        if cols.is_empty() {
            return 0.0;
        }
        DMatrix::from_fn(range.len(), cols.len(), |i, j| cols[j][i])
    };
    let frame = &v_r * basis;
    let restricted = frame.adjoint() * m * &frame;
    let herm = CMatrix::from_nalgebra((&restricted + restricted.adjoint()) * Complex64::new(0.5, 0.0)).expect("finite");
    let lowest = hermitian_eigenvalues(&herm).expect("Hermitian").first().copied().unwrap_or(0.0);
    (-lowest).max(0.0)
}

enum Step {
    Cluster(f64, usize),
    Pieces(Vec<(f64, f64, usize, Complex64)>),
}

/// Locator for one field and condition; keeps the contour cache across calls.
#[derive(Debug)]
pub struct Solver<'a> {
    counter: Counter<'a>,
    bc: BoundaryCondition,
    pub value_tol: f64,
    pub policy: SearchPolicy,
}

impl<'a> Solver<'a> {
    pub fn new(field: &'a CoefficientField, bc: &BoundaryCondition) -> Result<Self, ShootingError> {
        Self::with_config(field, bc, ContourConfig::default())
    }

    pub fn with_config(field: &'a CoefficientField, bc: &BoundaryCondition, config: ContourConfig) -> Result<Self, ShootingError> {
        Ok(Self { counter: Counter::new(field, bc, config)?, bc: bc.clone(), value_tol: 1e-10, policy: SearchPolicy::default() })
    }

    pub fn with_tolerance(mut self, value_tol: f64) -> Self {
        self.value_tol = value_tol;
        self
    }

    pub fn with_policy(mut self, policy: SearchPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn counter(&mut self) -> &mut Counter<'a> {
        &mut self.counter
    }

    fn tol_at(&self, x: f64) -> f64 {
        self.value_tol.max(RELATIVE_FLOOR * x.abs())
    }

    /// Counts with endpoint nudging; returns the interval actually used.
    pub fn certified_count(&mut self, r1: f64, r2: f64) -> Result<(f64, f64, CountReport), ShootingError> {
        let (mut lo, mut hi) = (r1, r2);
        let mut tries = 0;
        loop {
            match self.counter.count(lo, hi) {
                Ok(r) => return Ok((lo, hi, r)),
                Err(ShootingError::EndpointTooCloseToEigenvalue { endpoint, .. }) if tries < NUDGE_TRIES => {
                    let shift = self.value_tol * 10f64.powi(tries as i32);
                    match endpoint {
                        Endpoint::Left => lo -= shift.max(self.tol_at(lo)),
                        Endpoint::Right => hi += shift.max(self.tol_at(hi)),
                    }
                    tries += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }

    pub fn count(&mut self, r1: f64, r2: f64) -> Result<usize, ShootingError> {
        Ok(self.counter.count(r1, r2)?.count)
    }

    /// All eigenvalues in `(r1, r2)` with multiplicities.
    pub fn locate(&mut self, r1: f64, r2: f64) -> Result<SpectrumSlice, ShootingError> {
        let start = self.counter.evaluations();
        let (lo, hi, report) = self.certified_count(r1, r2)?;
        self.locate_counted(r1, r2, lo, hi, report, start)
    }

    fn locate_counted(
        &mut self,
        r1: f64,
        r2: f64,
        lo: f64,
        hi: f64,
        report: CountReport,
        start: usize,
    ) -> Result<SpectrumSlice, ShootingError> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        let mut stack = vec![(lo, hi, report.count, report.moment, 0usize)];
        while let Some((a, b, n, moment, steps)) = stack.pop() {
            if n == 0 {
                continue;
            }
            if steps > MAX_STEPS_PER_CLUSTER {
                return Err(ShootingError::BisectionDepthExceeded { at: 0.5 * (a + b) });
            }
            match self.refine(a, b, n, moment)? {
                Step::Cluster(x, m) => out.push((x, m)),
                Step::Pieces(pieces) => {
                    for (pa, pb, pn, pm) in pieces.into_iter().rev() {
                        stack.push((pa, pb, pn, pm, steps + 1));
                    }
                }
            }
        }
        // Clusters closer than the tolerance are merged.
        let mut merged: Vec<(f64, usize)> = Vec::new();
        for (x, m) in out {
            match merged.last_mut() {
                Some((y, k)) if x - *y <= self.tol_at(x) => {
                    *y = (*y * *k as f64 + x * m as f64) / (*k + m) as f64;
                    *k += m;
                }
                _ => merged.push((x, m)),
            }
        }
        Ok(SpectrumSlice {
            r1: lo,
            r2: hi,
            eigenvalues: merged,
            certified: lo == r1 && hi == r2,
            total: report.count,
            evaluations: self.counter.evaluations() - start,
        })
    }

    fn refine(&mut self, a: f64, b: f64, n: usize, moment: Complex64) -> Result<Step, ShootingError> {
        let tol = self.tol_at(a).max(self.tol_at(b));
        if b - a <= tol {
            return Ok(Step::Cluster(0.5 * (a + b), n));
        }
        if n == 1 {
            if let Some(x) = self.polish(a, b, tol)? {
                return Ok(Step::Cluster(x, 1));
            }
        }
        // Zoom on the centroid of the enclosed zeros.
        let w = (b - a) / ZOOM_FACTOR;
        let centre = (moment.re / n as f64).clamp(a + w, b - w);
        if centre.is_finite() && w > tol {
            if let Ok(r) = self.counter.count(centre - w, centre + w) {
                if r.count == n {
                    return Ok(Step::Pieces(vec![(centre - w, centre + w, n, r.moment)]));
                }
            }
        }
        for off in SPLIT_OFFSETS {
            let m = a + (b - a) * (0.5 + off);
            match self.counter.count(a, m) {
                Ok(left) if left.count <= n => {
                    return Ok(Step::Pieces(vec![(a, m, left.count, left.moment), (m, b, n - left.count, moment - left.moment)]));
                }
                Ok(_) => continue,
                Err(ShootingError::EndpointTooCloseToEigenvalue { endpoint: Endpoint::Right, .. }) => continue,
                Err(ShootingError::ZeroOnContour { .. }) | Err(ShootingError::NonIntegerWinding { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(ShootingError::BisectionDepthExceeded { at: 0.5 * (a + b) })
    }

    /// Illinois iteration on the real axis for a bracket holding one simple zero.
    fn polish(&mut self, a: f64, b: f64, tol: f64) -> Result<Option<f64>, ShootingError> {
        let chi = self.counter.characteristic();
        let ga = chi.eval(Complex64::new(a, 0.0));
        let gb = chi.eval(Complex64::new(b, 0.0));
        if ga.is_zero() || gb.is_zero() {
            return Ok(None);
        }
        // Γ has a constant phase on the real axis up to sign changes.
        let turn = ga.arg_to(&gb);
        if (turn.abs() - std::f64::consts::PI).abs() > std::f64::consts::FRAC_PI_3 {
            return Ok(None);
        }
        let rot = Complex64::from_polar(1.0, -ga.arg());
        let reference = ga.log_scale;
        let f = |x: f64| {
            let g = chi.eval(Complex64::new(x, 0.0));
            (g.mantissa * rot).re * (g.log_scale - reference).clamp(-700.0, 700.0).exp()
        };
        let (mut lo, mut hi) = (a, b);
        let (mut flo, mut fhi) = (f(lo), f(hi));
        if !(flo * fhi < 0.0) {
            return Ok(None);
        }
        let mut side = 0i32;
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            x = (lo * fhi - hi * flo) / (fhi - flo);
            if !(x > lo && x < hi) {
                x = 0.5 * (lo + hi);
            }
            let fx = f(x);
            if fx == 0.0 {
                lo = x;
                hi = x;
                break;
            }
            if fx * flo < 0.0 {
                hi = x;
                fhi = fx;
                if side == -1 {
                    flo *= 0.5;
                }
                side = -1;
            } else {
                lo = x;
                flo = fx;
                if side == 1 {
                    fhi *= 0.5;
                }
                side = 1;
            }
            // Once the bracket is near the tolerance, close it from both sides.
            if hi - lo <= tol {
                break;
            }
            let mid = x;
            let eps = 0.5 * tol;
            if mid - eps > lo && mid + eps < hi {
                let (fl, fr) = (f(mid - eps), f(mid + eps));
                if fl * fr < 0.0 {
                    lo = mid - eps;
                    hi = mid + eps;
                    break;
                }
            }
        }
        if hi - lo > tol {
            return Ok(None);
        }
        let root = 0.5 * (lo + hi);
        let _ = x;
        // Verify that exactly one zero sits at the root.
        let h = tol.max(hi - lo);
        match self.counter.count(root - h, root + h) {
            Ok(r) if r.count == 1 => Ok(Some(root)),
            Ok(_) => Ok(None),
            Err(ShootingError::ContourRefinementLimit { evaluations }) => Err(ShootingError::ContourRefinementLimit { evaluations }),
            Err(_) => Ok(None),
        }
    }

    /// Lower end of the search window per the policy.
    pub fn lower_bound(&mut self) -> Result<f64, ShootingError> {
        let l = match self.policy {
            SearchPolicy::Fixed(l) => l,
            SearchPolicy::FormBound => spectral_lower_bound(self.counter.characteristic().field(), &self.bc),
            SearchPolicy::Doubling { l0, step, guard, max_steps } => {
                let mut found = None;
                for k in 0..max_steps {
                    let l = l0 - 2f64.powi(k as i32) * step;
                    let (glo, _, r) = self.certified_count(l - guard, l)?;
                    if r.count == 0 {
                        found = Some(glo.min(l));
                        break;
                    }
                }
                found.ok_or(ShootingError::SearchExhausted { bound: l0 - 2f64.powi(max_steps as i32) * step })?
            }
        };
        if !l.is_finite() || l < SEARCH_FLOOR {
            return Err(ShootingError::SearchExhausted { bound: l });
        }
        Ok(l)
    }

    /// A located slice `[L, U]` holding at least `m` eigenvalues, `L` from the policy.
    pub fn lowest_slice(&mut self, m: usize) -> Result<SpectrumSlice, ShootingError> {
        let l = self.lower_bound()?;
        let start = self.counter.evaluations();
        let (lo, mut hi, mut report) = self.certified_count(l, l.max(0.0) + 10.0)?;
        // The counted range grows by appending boxes, so earlier work is kept.
        for k in 1..=60 {
            if report.count >= m {
                return self.locate_counted(l, hi, lo, hi, report, start);
            }
            let u = l.max(0.0) + 10.0 * 2f64.powi(k);
            let (a, b, r) = self.certified_count(hi, u)?;
            if a == hi {
                report.count += r.count;
                report.moment += r.moment;
                report.right_log_ratio = r.right_log_ratio;
                hi = b;
            } else {
                let (_, b, r) = self.certified_count(lo, u)?;
                report = r;
                hi = b;
            }
        }
        Err(ShootingError::SearchExhausted { bound: l })
    }

    /// The lowest `m` eigenvalues, repeated by multiplicity.
    pub fn lowest(&mut self, m: usize) -> Result<Vec<f64>, ShootingError> {
        if m == 0 {
            return Ok(Vec::new());
        }
        let mut v = self.lowest_slice(m)?.expanded();
        v.truncate(m);
        Ok(v)
    }

    pub fn nth(&mut self, n: usize) -> Result<f64, ShootingError> {
        if n == 0 {
            return Err(ShootingError::IndexOutOfRange { index: 0, available: 0 });
        }
        Ok(self.lowest(n)?[n - 1])
    }
}

/// Eigenvalues in `(r1, r2)` located to `value_tol`.
pub fn locate_eigenvalues(
    field: &CoefficientField,
    bc: &BoundaryCondition,
    r1: f64,
    r2: f64,
    value_tol: f64,
) -> Result<SpectrumSlice, ShootingError> {
    Solver::new(field, bc)?.with_tolerance(value_tol).locate(r1, r2)
}

/// [`locate_eigenvalues`] with an explicit contour configuration.
pub fn locate_with(
    field: &CoefficientField,
    bc: &BoundaryCondition,
    r1: f64,
    r2: f64,
    value_tol: f64,
    config: ContourConfig,
) -> Result<SpectrumSlice, ShootingError> {
    Solver::with_config(field, bc, config)?.with_tolerance(value_tol).locate(r1, r2)
}

/// `λ_n`, counting by analytic multiplicity (`n ≥ 1`).
pub fn nth_eigenvalue(field: &CoefficientField, bc: &BoundaryCondition, n: usize, search: SearchPolicy) -> Result<f64, ShootingError> {
    Solver::new(field, bc)?.with_policy(search).nth(n)
}

/// `λ_1, …, λ_m`.
pub fn nth_eigenvalues(field: &CoefficientField, bc: &BoundaryCondition, m: usize, search: SearchPolicy) -> Result<Vec<f64>, ShootingError> {
    Solver::new(field, bc)?.with_policy(search).lowest(m)
}

/// `λ_1, …, λ_m` with the default search policy.
pub fn lowest_eigenvalues(field: &CoefficientField, bc: &BoundaryCondition, m: usize) -> Result<Vec<f64>, ShootingError> {
    nth_eigenvalues(field, bc, m, SearchPolicy::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bc::chart_compose;
    use crate::kernel::CMatrix;
    use crate::model::{decoupled_field, ScalarCoefficients};
    use std::f64::consts::PI;

    fn unit() -> CoefficientField {
        CoefficientField::scalar(0.0, 1.0, 1.0, 0.0, 1.0).unwrap()
    }

    fn double_unit() -> CoefficientField {
        let c = ScalarCoefficients::new(1.0, 0.0, 1.0);
        decoupled_field(vec![0.0, 1.0], &[vec![c], vec![c]]).unwrap()
    }

    fn rellich(kappa: f64) -> BoundaryCondition {
        chart_compose(&[0, 1], &CMatrix::from_real_diagonal(&[0.0, kappa])).unwrap()
    }

    /// Roots of `tan k = κk` (λ = k²) and `tanh k = κk` (λ = −k²) by bisection.
    fn rellich_oracle(kappa: f64, m: usize) -> Vec<f64> {
        let bisect = |f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64| {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(lo) * f(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let mut out = Vec::new();
        if kappa < 1.0 {
            let k = bisect(&|k: f64| k.tanh() - kappa * k, 1e-6, 2.0 / kappa);
            out.push(-k * k);
        } else if kappa == 1.0 {
            out.push(0.0);
        }
        // sin k − κk cos k has at most one root on each ((j − ½)π, (j + ½)π).
        let mut j = 0;
        while out.len() < m {
            let f = |k: f64| k.sin() - kappa * k * k.cos();
            let (lo, hi) = (j as f64 * PI - 0.5 * PI, j as f64 * PI + 0.5 * PI);
            let lo = lo.max(1e-9);
            if f(lo) * f(hi) < 0.0 {
                let k = bisect(&f, lo, hi);
                out.push(k * k);
            }
            j += 1;
        }
        out
    }

    #[test]
    fn locates_closed_form_spectra() {
        let f = unit();
        let s = locate_eigenvalues(&f, &BoundaryCondition::dirichlet(1), 0.5, 50.0, 1e-8).unwrap();
        assert_eq!(s.eigenvalues.len(), 2);
        assert!((s.eigenvalues[0].0 - PI * PI).abs() < 1e-8 && s.eigenvalues[0].1 == 1);
        assert!((s.eigenvalues[1].0 - 4.0 * PI * PI).abs() < 1e-8 && s.eigenvalues[1].1 == 1);
        assert!(s.certified);

        let s = locate_eigenvalues(&f, &BoundaryCondition::neumann(1), -1.0, 50.0, 1e-8).unwrap();
        let v: Vec<f64> = s.eigenvalues.iter().map(|e| e.0).collect();
        assert_eq!(v.len(), 3);
        for (x, e) in v.iter().zip([0.0, PI * PI, 4.0 * PI * PI]) {
            assert!((x - e).abs() < 1e-8, "{x} vs {e}");
        }

        let s = locate_eigenvalues(&double_unit(), &BoundaryCondition::dirichlet(2), 0.5, 15.0, 1e-8).unwrap();
        assert_eq!(s.eigenvalues.len(), 1);
        assert_eq!(s.eigenvalues[0].1, 2);
        assert!((s.eigenvalues[0].0 - PI * PI).abs() < 1e-8);
        assert_eq!(s.total, 2);
    }

    #[test]
    fn nth_examples() {
        let f = unit();
        let x = nth_eigenvalue(&f, &BoundaryCondition::dirichlet(1), 3, SearchPolicy::default()).unwrap();
        assert!((x - 9.0 * PI * PI).abs() < 1e-8);
        let x = nth_eigenvalue(&f, &rellich(0.0), 1, SearchPolicy::default()).unwrap();
        assert!((x - PI * PI).abs() < 1e-8);
        let v = nth_eigenvalues(&double_unit(), &BoundaryCondition::dirichlet(2), 2, SearchPolicy::doubling()).unwrap();
        assert!((v[0] - PI * PI).abs() < 1e-8 && (v[1] - PI * PI).abs() < 1e-8);
    }

    #[test]
    fn rellich_matches_transcendental_roots() {
        let f = unit();
        for kappa in [1.0, 0.1, 2.5] {
            let got = lowest_eigenvalues(&f, &rellich(kappa), 5).unwrap();
            let want = rellich_oracle(kappa, 5);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-6 * w.abs().max(1.0), "κ={kappa}: {g} vs {w}");
            }
        }
    }

    #[test]
    fn form_bound_is_below_spectrum() {
        let f = unit();
        for kappa in [1.0, 0.1, 0.01] {
            let l = spectral_lower_bound(&f, &rellich(kappa));
            let oracle = rellich_oracle(kappa, 1)[0];
            assert!(l < oracle, "{l} vs {oracle}");
        }
        assert!(spectral_lower_bound(&f, &BoundaryCondition::dirichlet(1)) <= -1.0 + 1e-12);
        // Stiff Robin coefficients of the stabilizing sign do not move the bound.
        let stable = crate::bc::chart_compose(&[0, 1], &CMatrix::from_real_diagonal(&[-1e-4, -1e-4])).unwrap();
        assert!(spectral_lower_bound(&f, &stable) >= -1.0 - 1e-12);
    }

    #[test]
    fn form_bound_holds_on_random_problems() {
        use crate::experiments::random::{random_chart, random_field, trial_rng};
        for t in 0..12 {
            let mut rng = trial_rng(31, t);
            let d = 1 + t % 2;
            let f = random_field(&mut rng, d, 2, 4.0);
            let bc = random_chart(&mut rng, d, 1.5).compose();
            let l = spectral_lower_bound(&f, &bc);
            let first = nth_eigenvalue(&f, &bc, 1, SearchPolicy::Fixed(-1e5)).unwrap();
            assert!(l < first, "trial {t}: bound {l} above {first}");
        }
    }

    #[test]
    fn rellich_far_branch() {
        let f = unit();
        let kappa = 2f64.powi(-10);
        let got = lowest_eigenvalues(&f, &rellich(kappa), 2).unwrap();
        let want = rellich_oracle(kappa, 2);
        assert!((got[0] - want[0]).abs() < 1e-8 * want[0].abs(), "{} vs {}", got[0], want[0]);
        assert!((got[1] - want[1]).abs() < 1e-8 * want[1].abs());
    }

    #[test]
    fn doubling_exhausts_when_far_branch_is_out_of_reach() {
        let f = unit();
        let policy = SearchPolicy::Doubling { l0: 0.0, step: 10.0, guard: 5.0, max_steps: 3 };
        // First guard window already empty: the scan stops early and misses nothing only if
        // the spectrum is above it, which it is for Dirichlet.
        assert!(nth_eigenvalue(&f, &BoundaryCondition::dirichlet(1), 1, policy).is_ok());
        let too_low = SearchPolicy::Fixed(-2.0e9);
        assert!(matches!(
            nth_eigenvalue(&f, &BoundaryCondition::dirichlet(1), 1, too_low),
            Err(ShootingError::SearchExhausted { .. })
        ));
    }
}
