//! Argument-principle counting of the zeros of `Γ`.
//!
//! Winding numbers are summed from principal argument increments between
//! adaptively refined samples. A segment is accepted when both halves turn by
//! less than `π/4`, `ln|Γ|` at the midpoint is within one unit of the chord,
//! and the a-priori turning of the exponential factor of `Γ` across the
//! segment, bounded through the variation of `Re √λ`, stays below `π/4`. Vertical sides are pre-sampled geometrically towards the real axis,
//! where `Γ` changes fastest; they are cached so that adjacent rectangles in a
//! bisection share them.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::characteristic::{Characteristic, ScaledValue};
use super::{Endpoint, ShootingError};
use crate::bc::BoundaryCondition;
use crate::model::CoefficientField;

/// Tunables of the contour integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourConfig {
    /// Minimum rectangle half-height `δ`.
    pub delta: f64,
    /// Half-height as a fraction of the width once that exceeds `delta`.
    pub aspect: f64,
    /// Cap `c` on the half-height `c·√|x|`, which bounds how far `Γ` turns on
    /// vertical sides far out on the negative axis.
    pub sqrt_cap: f64,
    /// Certification floor: `|Γ(r)| > floor · max |Γ(r + iy)|` over sampled `|y| ≤ delta`.
    pub floor: f64,
    pub max_depth: usize,
    pub max_evaluations: usize,
    /// Geometric levels `δ·2^{-k}` pre-sampled on vertical sides.
    pub vertical_levels: usize,
    pub horizontal_segments: usize,
    pub circle_segments: usize,
    pub max_turn: f64,
    pub max_log_bend: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self {
            delta: 1.0,
            aspect: 0.5,
            sqrt_cap: 32.0,
            floor: 1e-8,
            max_depth: 48,
            max_evaluations: 400_000,
            vertical_levels: 12,
            horizontal_segments: 16,
            circle_segments: 32,
            max_turn: PI / 4.0,
            max_log_bend: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct PathSum {
    /// Total argument change.
    turn: f64,
    /// `Σ z_mid · Δ log Γ`, a quadrature of `∮ z dlog Γ`.
    moment: Complex64,
    max_ln: f64,
    min_ln: f64,
}

impl PathSum {
    fn empty() -> Self {
        Self { turn: 0.0, moment: Complex64::new(0.0, 0.0), max_ln: f64::NEG_INFINITY, min_ln: f64::INFINITY }
    }

    fn add(&mut self, other: &PathSum) {
        self.turn += other.turn;
        self.moment += other.moment;
        self.max_ln = self.max_ln.max(other.max_ln);
        self.min_ln = self.min_ln.min(other.min_ln);
    }

    fn see(&mut self, g: &ScaledValue) {
        let l = g.ln_abs();
        self.max_ln = self.max_ln.max(l);
        self.min_ln = self.min_ln.min(l);
    }
}

#[derive(Debug, Clone, Copy)]
struct Side {
    /// Sum along the upward traversal `x − iδ → x + iδ`.
    up: PathSum,
    log_ratio: f64,
}

/// Result of one rectangle count.
#[derive(Debug, Clone, Copy)]
pub struct CountReport {
    pub count: usize,
    /// Estimate of the sum of the enclosed zeros.
    pub moment: Complex64,
    /// `ln(|Γ(r₁)| / max |Γ|)` over the certification window of the left side.
    pub left_log_ratio: f64,
    pub right_log_ratio: f64,
}

/// Counts zeros of `Γ` for one field and condition, caching vertical sides.
#[derive(Debug)]
pub struct Counter<'a> {
    chi: Characteristic<'a>,
    pub config: ContourConfig,
    sides: HashMap<(u64, u64), Side>,
    evaluations: usize,
    /// Bound on `d·Σ ℓ √(‖W‖‖P⁻¹‖)`, the turning rate of `Γ` per unit of `√λ`.
    phase_rate: f64,
}

impl<'a> Counter<'a> {
    pub fn new(field: &'a CoefficientField, bc: &BoundaryCondition, config: ContourConfig) -> Result<Self, ShootingError> {
        let bp = field.breakpoints();
        let spread: f64 = field
            .pieces()
            .iter()
            .enumerate()
            .map(|(k, pc)| (bp[k + 1] - bp[k]) * (pc.w.norm() * pc.p_inv().norm()).sqrt())
            .sum();
        Ok(Self {
            chi: Characteristic::new(field, bc)?,
            config,
            sides: HashMap::new(),
            evaluations: 0,
            phase_rate: field.dim() as f64 * spread,
        })
    }

    pub fn characteristic(&self) -> &Characteristic<'a> {
        &self.chi
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    fn eval_raw(&mut self, z: Complex64) -> ScaledValue {
        self.evaluations += 1;
        self.chi.eval(z)
    }

    fn eval(&mut self, z: Complex64) -> Result<ScaledValue, ShootingError> {
        self.evaluations += 1;
        if self.evaluations > self.config.max_evaluations {
            return Err(ShootingError::ContourRefinementLimit { evaluations: self.evaluations });
        }
        let g = self.chi.eval(z);
        if g.is_zero() || !g.ln_abs().is_finite() {
            return Err(ShootingError::ZeroOnContour { at: z });
        }
        Ok(g)
    }

    /// Adaptive refinement of one segment.
    fn segment(
        &mut self,
        z0: Complex64,
        g0: ScaledValue,
        z1: Complex64,
        g1: ScaledValue,
        depth: usize,
    ) -> Result<PathSum, ShootingError> {
        let zm = (z0 + z1) * 0.5;
        let gm = self.eval(zm)?;
        let a1 = g0.arg_to(&gm);
        let a2 = gm.arg_to(&g1);
        let (l0, lm, l1) = (g0.ln_abs(), gm.ln_abs(), g1.ln_abs());
        let ok = self.phase_rate * (sqrt_re_variation(z0, zm) + sqrt_re_variation(zm, z1)) < self.config.max_turn
            && a1.abs() < self.config.max_turn
            && a2.abs() < self.config.max_turn
            && (lm - 0.5 * (l0 + l1)).abs() < self.config.max_log_bend;
        if ok {
            let mut s = PathSum::empty();
            s.see(&gm);
            s.turn = a1 + a2;
            s.moment = (z0 + zm) * 0.5 * Complex64::new(lm - l0, a1) + (zm + z1) * 0.5 * Complex64::new(l1 - lm, a2);
            return Ok(s);
        }
        if depth >= self.config.max_depth {
            return Err(ShootingError::ContourRefinementLimit { evaluations: self.evaluations });
        }
        let mut left = self.segment(z0, g0, zm, gm, depth + 1)?;
        let right = self.segment(zm, gm, z1, g1, depth + 1)?;
        left.add(&right);
        left.see(&gm);
        Ok(left)
    }

    /// Sums along a polyline of fixed vertices.
    fn polyline(&mut self, pts: &[Complex64]) -> Result<PathSum, ShootingError> {
        let vals = pts.iter().map(|&z| self.eval(z)).collect::<Result<Vec<_>, _>>()?;
        self.refine_polyline(pts, &vals)
    }

    fn refine_polyline(&mut self, pts: &[Complex64], vals: &[ScaledValue]) -> Result<PathSum, ShootingError> {
        let mut total = PathSum::empty();
        for g in vals {
            total.see(g);
        }
        for i in 0..pts.len() - 1 {
            let s = self.segment(pts[i], vals[i], pts[i + 1], vals[i + 1], 0)?;
            total.add(&s);
        }
        Ok(total)
    }

    /// Upward side through `x`; the axis value is certified against the
    /// coarse samples before any refinement.
    fn side(&mut self, x: f64, delta: f64, endpoint: Endpoint) -> Result<Side, ShootingError> {
        let key = (x.to_bits(), delta.to_bits());
        if let Some(s) = self.sides.get(&key) {
            return Ok(*s);
        }
        let levels = self.config.vertical_levels;
        let mut ys: Vec<f64> = (0..=levels).map(|k| -delta * 0.5f64.powi(k as i32)).collect();
        ys.push(0.0);
        ys.extend((0..=levels).rev().map(|k| delta * 0.5f64.powi(k as i32)));
        let pts: Vec<Complex64> = ys.iter().map(|&y| Complex64::new(x, y)).collect();
        let axis = self.eval_raw(pts[levels + 1]);
        let vals = pts
            .iter()
            .enumerate()
            .map(|(i, &z)| if i == levels + 1 { Ok(axis) } else { self.eval(z) })
            .collect::<Result<Vec<_>, _>>()?;
        // Off-axis growth is exponential on tall sides, so certify against the part near the axis.
        let near = self.config.delta;
        let max_ln = pts
            .iter()
            .zip(&vals)
            .filter(|(z, _)| z.im.abs() <= near)
            .map(|(_, g)| g.ln_abs())
            .fold(f64::NEG_INFINITY, f64::max);
        let log_ratio = axis.ln_abs() - max_ln;
        if !(log_ratio >= self.config.floor.ln()) {
            return Err(ShootingError::EndpointTooCloseToEigenvalue { endpoint, at: x, log_ratio });
        }
        let up = self.refine_polyline(&pts, &vals)?;
        let side = Side { up, log_ratio };
        self.sides.insert(key, side);
        Ok(side)
    }

    /// Half-height of the contour above `x` for an interval of width `w`:
    /// `min(w, max(δ, min(aspect·w, c·√|x|)))`.
    ///
    /// Zeros are real, so the height only sets the sampling scale. Far out on
    /// the negative axis `Re √(x + i·c√|x|)` stays near `c/2`, so the profile
    /// adds no oscillation of its own.
    pub fn height_at(&self, x: f64, w: f64) -> f64 {
        let cap = self.config.sqrt_cap * x.abs().sqrt();
        w.min(self.config.delta.max((self.config.aspect * w).min(cap)))
    }

    /// Vertices of the lower side from `r1 − ih(r1)` to `r2 − ih(r2)`, spaced
    /// by at most the local height, which resolves the argument swing of
    /// every enclosed zero cluster.
    fn lower_path(&self, r1: f64, r2: f64) -> Vec<Complex64> {
        let w = r2 - r1;
        let max_step = w / self.config.horizontal_segments as f64;
        let mut x = r1;
        let mut out = vec![Complex64::new(r1, -self.height_at(r1, w))];
        while x < r2 {
            let h = self.height_at(x, w);
            let step = h.min(self.height_at(x + h, w)).min(max_step);
            x = if r2 - x <= step * 1.000001 || x + step <= x { r2 } else { x + step };
            out.push(Complex64::new(x, -self.height_at(x, w)));
        }
        out
    }

    pub fn count(&mut self, r1: f64, r2: f64) -> Result<CountReport, ShootingError> {
        if !(r1 < r2) || !r1.is_finite() || !r2.is_finite() {
            return Err(ShootingError::InvalidInterval { r1, r2 });
        }
        let width = r2 - r1;
        let left = self.side(r1, self.height_at(r1, width), Endpoint::Left)?;
        let right = self.side(r2, self.height_at(r2, width), Endpoint::Right)?;
        let left_ratio = left.log_ratio;
        let right_ratio = right.log_ratio;
        let bottom = self.lower_path(r1, r2);
        let top: Vec<Complex64> = bottom.iter().rev().map(|z| z.conj()).collect();
        let b = self.polyline(&bottom)?;
        let t = self.polyline(&top)?;
        let turn = b.turn + right.up.turn + t.turn - left.up.turn;
        let moment = b.moment + right.up.moment + t.moment - left.up.moment;
        let winding = turn / (2.0 * PI);
        let count = winding.round();
        if count < 0.0 || (winding - count).abs() > 0.05 {
            return Err(ShootingError::NonIntegerWinding { winding });
        }
        Ok(CountReport {
            count: count as usize,
            moment: moment / Complex64::new(0.0, 2.0 * PI),
            left_log_ratio: left_ratio,
            right_log_ratio: right_ratio,
        })
    }

    /// Winding number around `|λ − center| = radius`.
    pub fn circle(&mut self, center: f64, radius: f64) -> Result<usize, ShootingError> {
        let m = self.config.circle_segments;
        let pts: Vec<Complex64> = (0..=m)
            .map(|i| Complex64::new(center, 0.0) + Complex64::from_polar(radius, 2.0 * PI * i as f64 / m as f64))
            .collect();
        let s = self.polyline(&pts)?;
        if s.min_ln - s.max_ln < self.config.floor.ln() {
            return Err(ShootingError::ZeroOnContour { at: Complex64::new(center, radius) });
        }
        let winding = s.turn / (2.0 * PI);
        let count = winding.round();
        if count < 0.0 || (winding - count).abs() > 0.05 {
            return Err(ShootingError::NonIntegerWinding { winding });
        }
        Ok(count as usize)
    }

    /// Drops cached sides; the cache grows with every distinct endpoint.
    pub fn clear_cache(&mut self) {
        self.sides.clear();
    }
}

/// Change of `Re √λ`, which is continuous across the branch cut and sets the
/// phase of the oscillatory factors `exp(±i c√λ)`.
fn sqrt_re_variation(z0: Complex64, z1: Complex64) -> f64 {
    (z1.sqrt().re - z0.sqrt().re).abs()
}

/// Number of eigenvalues in `(r1, r2)` counted with analytic multiplicity.
pub fn count_in_interval(field: &CoefficientField, bc: &BoundaryCondition, r1: f64, r2: f64) -> Result<usize, ShootingError> {
    Ok(Counter::new(field, bc, ContourConfig::default())?.count(r1, r2)?.count)
}

/// Order of `λ*` as a zero of `Γ`, from the winding around a circle.
pub fn analytic_multiplicity(
    field: &CoefficientField,
    bc: &BoundaryCondition,
    lambda_star: f64,
    radius: f64,
) -> Result<usize, ShootingError> {
    Counter::new(field, bc, ContourConfig::default())?.circle(lambda_star, radius)
}
