//! Eigenvalue scans towards singular boundary conditions.

use rayon::prelude::*;
use serde_json::json;

use super::{eigen_cells, fmt_values, Assertion, Cell, ExperimentError, Report, ScanOptions, Series, Status};
use crate::bc::{approach_path, canonical_singular, chart_compose, BoundaryCondition};
use crate::kernel::{CMatrix, Inertia};
use crate::model::{CoefficientField, HomotopyPoint};
use crate::shooting::{Solver, RELATIVE_FLOOR};

/// Eigenvalues along a family approaching a singular condition.
#[derive(Debug, Clone)]
pub struct JumpScanReport {
    pub name: String,
    pub series: Series,
    /// Number of branches predicted to diverge.
    pub predicted_jumps: usize,
    /// Lowest eigenvalues of the limit problem.
    pub target_spectrum: Vec<f64>,
    pub assertions: Vec<Assertion>,
}

impl Report for JumpScanReport {
    fn name(&self) -> &str {
        &self.name
    }

    fn series(&self) -> Vec<&Series> {
        vec![&self.series]
    }

    fn assertions(&self) -> &[Assertion] {
        &self.assertions
    }

    fn extra(&self) -> serde_json::Value {
        json!({ "predicted_jumps": self.predicted_jumps, "target_spectrum": self.target_spectrum })
    }
}

/// `s_k = 2^{-k}` for `k = 0..=12`.
pub fn default_s_values() -> Vec<f64> {
    (0..=12).map(|k| 0.5f64.powi(k)).collect()
}

fn check_decreasing(points: &[f64]) -> Result<(), ExperimentError> {
    if points.is_empty() || points.iter().any(|&s| !(s > 0.0)) || points.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(ExperimentError::Invalid("parameter values must be positive and strictly decreasing".into()));
    }
    Ok(())
}

fn target_values(field: &CoefficientField, bc: &BoundaryCondition, count: usize, opts: &ScanOptions) -> Result<Vec<f64>, ExperimentError> {
    Ok(Solver::new(field, bc)?.with_tolerance(opts.value_tol).lowest(count)?)
}

fn last_three(cells: &[Vec<Cell>], n: usize) -> Option<Vec<&Cell>> {
    if cells.len() < 3 {
        return None;
    }
    Some(cells[cells.len() - 3..].iter().map(|row| &row[n]).collect())
}

/// The jump-count and index-shift checks on a finished scan.
fn jump_assertions(series: &Series, jumps: usize, target: &[f64], opts: &ScanOptions) -> Vec<Assertion> {
    let mut out = Vec::new();
    let last = series.cells.last().expect("non-empty scan");
    let s_min = *series.points.last().expect("non-empty scan");
    let m = last.len();
    let diverged: Vec<usize> = (0..m).filter(|&n| last[n].status == Status::Diverged).collect();
    out.push(Assertion::new(
        "divergence_count",
        diverged.len() == jumps,
        format!("{} diverged branches at s = {s_min:e}, predicted {jumps}", diverged.len()),
    ));
    out.push(Assertion::new(
        "divergence_indices",
        diverged == (0..jumps.min(m)).collect::<Vec<_>>(),
        format!("diverged branch indices {:?}", diverged.iter().map(|n| n + 1).collect::<Vec<_>>()),
    ));

    let mut mono_ok = true;
    let mut mono_detail = String::from("diverging branches decrease over the last three samples");
    for n in 0..jumps.min(m) {
        match last_three(&series.cells, n) {
            None => {
                mono_detail = "fewer than three samples".into();
            }
            Some(c) => {
                let v: Vec<Option<f64>> = c.iter().map(|x| x.value).collect();
                if let (Some(a), Some(b), Some(z)) = (v[0], v[1], v[2]) {
                    if !(b < a && z < b) {
                        mono_ok = false;
                        mono_detail = format!("branch {} not decreasing: {}", n + 1, fmt_values(&[a, b, z]));
                    }
                }
            }
        }
    }
    out.push(Assertion::new("divergent_monotone", mono_ok, mono_detail));

    let mut conv_ok = true;
    let mut worst = 0.0f64;
    let mut conv_detail = String::new();
    let mut approach_ok = true;
    let mut approach_detail = String::from("convergent branch errors non-increasing over the last three samples");
    for n in jumps..m {
        let Some(&t) = target.get(n - jumps) else {
            conv_ok = false;
            conv_detail = format!("no target eigenvalue for branch {}", n + 1);
            continue;
        };
        let scale = t.abs().max(1.0);
        match last[n].finite() {
            Some(v) => {
                let rel = (v - t).abs() / scale;
                worst = worst.max(rel);
                if rel > opts.conv_rtol {
                    conv_ok = false;
                    conv_detail = format!("branch {}: {v:.10} vs target {t:.10} (relative {rel:.3e})", n + 1);
                }
            }
            None => {
                conv_ok = false;
                conv_detail = format!("branch {} has no finite value at s = {s_min:e}", n + 1);
            }
        }
        if let Some(c) = last_three(&series.cells, n) {
            let e: Vec<Option<f64>> = c.iter().map(|x| x.finite().map(|v| (v - t).abs())).collect();
            match (e[0], e[1], e[2]) {
                (Some(a), Some(b), Some(z)) => {
                    // Solver resolution, see `Solver::tol_at`.
                    let slack = 2.0 * opts.value_tol.max(RELATIVE_FLOOR * scale);
                    if !(b <= a + slack && z <= b + slack) {
                        approach_ok = false;
                        approach_detail = format!("branch {} errors {:.3e}, {:.3e}, {:.3e}", n + 1, a, b, z);
                    }
                }
                _ => {
                    approach_ok = false;
                    approach_detail = format!("branch {} missing values in the last three samples", n + 1);
                }
            }
        }
    }
    if conv_ok {
        conv_detail = format!("max relative deviation {worst:.3e} ≤ {:.1e}", opts.conv_rtol);
    }
    out.push(Assertion::new("shifted_convergence", conv_ok, conv_detail));
    out.push(Assertion::new("convergence_monotone", approach_ok, approach_detail));
    out
}

fn sample<F>(points: &[f64], m: usize, opts: &ScanOptions, make: F) -> Vec<Vec<Cell>>
where
    F: Fn(f64) -> Result<(CoefficientField, BoundaryCondition), ExperimentError> + Sync,
{
    points
        .par_iter()
        .map(|&s| match make(s) {
            Ok((field, bc)) => eigen_cells(&field, &bc, m, opts),
            Err(e) => vec![Cell::failed(e.to_string()); m],
        })
        .collect()
}

/// `−u'' = λu` on `[0, 1]` with `u(0) = 0` and `κu'(1) = u(1)`, for each `κ`.
pub fn run_rellich(kappas: &[f64], m: usize, opts: &ScanOptions) -> Result<JumpScanReport, ExperimentError> {
    check_decreasing(kappas)?;
    let m = m.max(2);
    let field = CoefficientField::scalar(0.0, 1.0, 1.0, 0.0, 1.0)?;
    let rellich_bc = |kappa: f64| chart_compose(&[0, 1], &CMatrix::from_real_diagonal(&[0.0, kappa]));
    let target_bc = rellich_bc(0.0)?;
    let target = target_values(&field, &target_bc, m - 1, opts)?;
    let cells = sample(kappas, m, opts, |kappa| Ok((field.clone(), rellich_bc(kappa)?)));
    let series = Series { label: "rellich".into(), param: "s".into(), points: kappas.to_vec(), cells };

    let mut assertions = Vec::new();
    let l1: Vec<Option<f64>> = series.cells.iter().map(|row| row[0].value).collect();
    let decreasing = l1.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b < a));
    assertions.push(Assertion::new(
        "lambda1_decreasing",
        decreasing,
        format!("λ₁ = {}", fmt_values(&l1.iter().map(|v| v.unwrap_or(f64::NAN)).collect::<Vec<_>>())),
    ));
    let k_min = *kappas.last().expect("checked non-empty");
    let leading = l1.last().copied().flatten().map(|v| v * k_min * k_min);
    assertions.push(Assertion::new(
        "lambda1_leading_order",
        leading.is_some_and(|r| (r + 1.0).abs() <= 0.2),
        format!("κ²λ₁ = {:.6} at κ = {k_min:e}, expected −1 within 20%", leading.unwrap_or(f64::NAN)),
    ));
    let t1 = target[0];
    let tail: Vec<Option<f64>> =
        series.cells.iter().rev().take(4).rev().map(|row| row[1].finite().map(|v| (v - t1).abs())).collect();
    let approach = tail.len() == 4 && tail.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b < a));
    assertions.push(Assertion::new(
        "lambda2_monotone_approach",
        approach,
        format!("|λ₂ − λ₁(0)| over the last four samples: {}", fmt_values(&tail.iter().map(|v| v.unwrap_or(f64::NAN)).collect::<Vec<_>>())),
    ));
    let shifted = jump_assertions(&series, 1, &target, opts).into_iter().find(|a| a.name == "shifted_convergence");
    assertions.extend(shifted);
    Ok(JumpScanReport { name: "rellich".into(), series, predicted_jumps: 1, target_spectrum: target, assertions })
}

/// Scan along the straight approach from stratum `source` to `canonical_singular(K, target)`.
pub fn run_jump_scan(
    field: &CoefficientField,
    k: &[usize],
    target: Inertia,
    source: Inertia,
    s_values: &[f64],
    m: usize,
    opts: &ScanOptions,
) -> Result<JumpScanReport, ExperimentError> {
    check_decreasing(s_values)?;
    let d = field.dim();
    // Validates the partitions before any solving.
    approach_path(k, target, source, s_values[0], d)?;
    let jumps = source.n_plus - target.n_plus;
    let target_bc = canonical_singular(k, target, d)?;
    let target_spec = target_values(field, &target_bc, m.saturating_sub(jumps), opts)?;
    let cells = sample(s_values, m, opts, |s| Ok((field.clone(), approach_path(k, target, source, s, d)?)));
    let series = Series { label: "jump".into(), param: "s".into(), points: s_values.to_vec(), cells };
    let assertions = jump_assertions(&series, jumps, &target_spec, opts);
    Ok(JumpScanReport {
        name: format!("jump-scan K={:?} target {target} source {source}", k.iter().map(|i| i + 1).collect::<Vec<_>>()),
        series,
        predicted_jumps: jumps,
        target_spectrum: target_spec,
        assertions,
    })
}

/// Jump scan while the field moves from `source_field` (s = 1) to `target_field` (s → 0).
#[allow(clippy::too_many_arguments)]
pub fn run_homotopy_scan(
    source_field: &CoefficientField,
    target_field: &CoefficientField,
    k: &[usize],
    target: Inertia,
    source: Inertia,
    s_values: &[f64],
    m: usize,
    opts: &ScanOptions,
) -> Result<JumpScanReport, ExperimentError> {
    check_decreasing(s_values)?;
    if !source_field.same_grid(target_field) {
        return Err(ExperimentError::Invalid("fields must share dimension, interval and breakpoints".into()));
    }
    let d = target_field.dim();
    approach_path(k, target, source, s_values[0], d)?;
    let jumps = source.n_plus - target.n_plus;
    let target_bc = canonical_singular(k, target, d)?;
    let target_spec = target_values(target_field, &target_bc, m.saturating_sub(jumps), opts)?;
    let cells = sample(s_values, m, opts, |s| {
        let field = HomotopyPoint { tau: 1.0 - s, source: source_field, target: target_field }.evaluate()?;
        Ok((field, approach_path(k, target, source, s, d)?))
    });
    let series = Series { label: "homotopy".into(), param: "s".into(), points: s_values.to_vec(), cells };
    let assertions = jump_assertions(&series, jumps, &target_spec, opts);
    Ok(JumpScanReport {
        name: format!("homotopy-scan K={:?} target {target} source {source}", k.iter().map(|i| i + 1).collect::<Vec<_>>()),
        series,
        predicted_jumps: jumps,
        target_spectrum: target_spec,
        assertions,
    })
}
