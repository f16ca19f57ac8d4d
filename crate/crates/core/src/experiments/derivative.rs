//! First-order dependence of a simple eigenvalue on the chart coordinates.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{Assertion, Cell, ExperimentError, Report, Series};
use crate::bc::{chart_compose, stratum_label_in, ChartRepr};
use crate::kernel::{hermitian_eigenvalues, CMatrix};
use crate::model::CoefficientField;
use crate::shooting::{eigenfunction, ContourConfig, Counter, Solver};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeRow {
    pub h: f64,
    pub plus: f64,
    pub minus: f64,
    pub fd: f64,
    pub discrepancy: f64,
}

#[derive(Debug, Clone)]
pub struct DerivativeReport {
    pub lambda: f64,
    /// `u*Hu` from the eigenfunction trace.
    pub predicted: f64,
    pub u: Vec<Complex64>,
    pub rows: Vec<DerivativeRow>,
    /// Observed orders between consecutive rows; `None` where the discrepancy is at noise level.
    pub orders: Vec<Option<f64>>,
    pub extrapolated: f64,
    pub series: Series,
    pub assertions: Vec<Assertion>,
}

impl Report for DerivativeReport {
    fn name(&self) -> &str {
        "derivative-check"
    }

    fn series(&self) -> Vec<&Series> {
        vec![&self.series]
    }

    fn assertions(&self) -> &[Assertion] {
        &self.assertions
    }

    fn extra(&self) -> serde_json::Value {
        json!({
            "lambda": self.lambda,
            "predicted": self.predicted,
            "extrapolated": self.extrapolated,
            "rows": self.rows,
            "orders": self.orders,
        })
    }
}

fn value_tol(lambda: f64) -> f64 {
    1e-12 * lambda.abs().max(1.0)
}

/// `λ_branch` of chart `(K, S)` with the lowest `branch + 2` eigenvalues.
fn lowest(field: &CoefficientField, k: &[usize], s: &CMatrix, count: usize, tol: f64) -> Result<Vec<f64>, ExperimentError> {
    let bc = chart_compose(k, s)?;
    Ok(Solver::new(field, &bc)?.with_tolerance(tol).lowest(count)?)
}

fn half_gap(values: &[f64], branch: usize) -> f64 {
    let x = values[branch];
    let below = if branch > 0 { x - values[branch - 1] } else { f64::INFINITY };
    let above = values.get(branch + 1).map_or(f64::INFINITY, |y| y - x);
    0.5 * below.min(above)
}

/// Compares `u*Hu` with centred differences of `λ_branch(S ± hH)` (branch 0-based).
pub fn run_derivative_check(
    field: &CoefficientField,
    chart: &ChartRepr,
    h_dir: &CMatrix,
    hs: &[f64],
    branch: usize,
) -> Result<DerivativeReport, ExperimentError> {
    let n = 2 * chart.dim;
    if h_dir.rows() != n || h_dir.cols() != n || !h_dir.is_hermitian(1e-12) {
        return Err(ExperimentError::Invalid(format!("H must be a Hermitian {n}x{n} matrix")));
    }
    if hs.len() < 2 || hs.iter().any(|&h| !(h > 0.0)) || hs.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(ExperimentError::Invalid("step sizes must be positive, decreasing and at least two".into()));
    }
    let bc = chart.compose();
    let base = lowest(field, &chart.k, &chart.s, branch + 2, 1e-10)?;
    let guess = base[branch];
    let tol = value_tol(guess);
    let base = lowest(field, &chart.k, &chart.s, branch + 2, tol)?;
    let lambda = base[branch];
    let gap = half_gap(&base, branch);
    let radius = gap.min(1.0);
    let multiplicity = Counter::new(field, &bc, ContourConfig::default())?.circle(lambda, radius)?;
    if multiplicity != 1 || gap < 10.0 * tol {
        return Err(ExperimentError::NotSimple { value: lambda, multiplicity });
    }
    let ef = eigenfunction(field, &bc, lambda, 0, 64)?;
    let u = chart.u_from_trace(&ef.trace);
    let hu = h_dir.apply(&u);
    let predicted = u.iter().zip(&hu).map(|(a, b)| a.conj() * b).sum::<Complex64>().re;

    let track = |h: f64| -> Result<(f64, f64), ExperimentError> {
        let mut out = [0.0; 2];
        for (slot, sign) in [1.0, -1.0].into_iter().enumerate() {
            let s = chart.s.add(&h_dir.scale_real(sign * h))?;
            let vals = lowest(field, &chart.k, &s, branch + 2, tol)?;
            let (best, dist) = vals
                .iter()
                .map(|&v| (v, (v - lambda).abs()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty spectrum");
            if dist > gap {
                return Err(ExperimentError::BranchTrackingAmbiguous { param: sign * h, distance: dist, half_gap: gap });
            }
            out[slot] = best;
        }
        Ok((out[0], out[1]))
    };
    let pairs = hs.par_iter().map(|&h| track(h)).collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<DerivativeRow> = hs
        .iter()
        .zip(pairs)
        .map(|(&h, (plus, minus))| {
            let fd = (plus - minus) / (2.0 * h);
            DerivativeRow { h, plus, minus, fd, discrepancy: (fd - predicted).abs() }
        })
        .collect();

    // Discrepancies below the eigenvalue noise carried into the quotient are not informative.
    let noise = |h: f64| 100.0 * tol / h;
    let orders: Vec<Option<f64>> = rows
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            (b.discrepancy > noise(b.h) && a.discrepancy > noise(a.h))
                .then(|| (a.discrepancy / b.discrepancy).ln() / (a.h / b.h).ln())
        })
        .collect();
    let (r1, r2) = (&rows[rows.len() - 2], &rows[rows.len() - 1]);
    let ratio2 = (r1.h / r2.h).powi(2);
    let extrapolated = (ratio2 * r2.fd - r1.fd) / (ratio2 - 1.0);

    let measured: Vec<f64> = orders.iter().flatten().copied().collect();
    let order_ok = measured.iter().all(|&p| p >= 1.9);
    let order_detail = if measured.is_empty() {
        "all discrepancies at noise level".to_string()
    } else {
        format!("observed orders {}", super::fmt_values(&measured))
    };
    let limit_err = (extrapolated - predicted).abs();
    let limit_tol = 1e-6 * (1.0 + predicted.abs());
    let assertions = vec![
        Assertion::new("richardson_order", order_ok, order_detail),
        Assertion::new(
            "extrapolated_limit",
            limit_err <= limit_tol,
            format!("extrapolated {extrapolated:.10} vs u*Hu {predicted:.10} (error {limit_err:.3e}, tolerance {limit_tol:.1e})"),
        ),
    ];
    let series = Series {
        label: "derivative".into(),
        param: "h".into(),
        points: rows.iter().map(|r| r.h).collect(),
        cells: rows.iter().map(|r| vec![Cell::ok(r.fd)]).collect(),
    };
    Ok(DerivativeReport { lambda, predicted, u, rows, orders, extrapolated, series, assertions })
}

#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    pub series: Series,
    pub assertions: Vec<Assertion>,
}

impl Report for MonotonicityReport {
    fn name(&self) -> &str {
        "monotonicity-check"
    }

    fn series(&self) -> Vec<&Series> {
        vec![&self.series]
    }

    fn assertions(&self) -> &[Assertion] {
        &self.assertions
    }
}

/// `λ_branch(S + tH)` for `t = 0` and each step, with `H ≥ 0`.
///
/// The branch is followed by its index in the ordered spectrum, which by
/// min-max is the continuous branch whenever it stays simple. Paths that
/// leave the stratum of `chart` are rejected with `StrataMismatch`.
pub fn run_monotonicity_check(
    field: &CoefficientField,
    chart: &ChartRepr,
    h_dir: &CMatrix,
    steps: &[f64],
    branch: usize,
) -> Result<MonotonicityReport, ExperimentError> {
    let n = 2 * chart.dim;
    if h_dir.rows() != n || h_dir.cols() != n || !h_dir.is_hermitian(1e-12) {
        return Err(ExperimentError::Invalid(format!("H must be a Hermitian {n}x{n} matrix")));
    }
    let min_eig = hermitian_eigenvalues(h_dir)?.first().copied().unwrap_or(0.0);
    if min_eig < -1e-12 * (1.0 + h_dir.max_abs()) {
        return Err(ExperimentError::Invalid(format!("H is not positive semidefinite (eigenvalue {min_eig:e})")));
    }
    if steps.iter().any(|&t| !(t > 0.0)) || steps.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ExperimentError::Invalid("steps must be positive and increasing".into()));
    }
    // Eigenvalues of (S + tH)_K are nondecreasing in t, so equal labels at both
    // ends keep the whole path inside one stratum.
    if let Some(&t_max) = steps.last() {
        let label = |s: &CMatrix| stratum_label_in(&chart_compose(&chart.k, s)?, &chart.k, None);
        let start = label(&chart.s)?;
        let end = label(&chart.s.add(&h_dir.scale_real(t_max))?)?;
        if start != end {
            return Err(ExperimentError::StrataMismatch(start.to_string(), end.to_string()));
        }
    }
    let mut ts = vec![0.0];
    ts.extend_from_slice(steps);
    let values = ts
        .par_iter()
        .map(|&t| {
            let s = chart.s.add(&h_dir.scale_real(t))?;
            let v = lowest(field, &chart.k, &s, branch + 1, 1e-12)?;
            Ok(v[branch])
        })
        .collect::<Result<Vec<f64>, ExperimentError>>()?;
    let worst = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let pass = values.len() < 2 || worst >= -1e-9;
    let assertions = vec![Assertion::new(
        "monotone",
        pass,
        format!("smallest increment {:.3e} over {} steps", if values.len() < 2 { 0.0 } else { worst }, steps.len()),
    )];
    let series = Series {
        label: "monotonicity".into(),
        param: "t".into(),
        points: ts,
        cells: values.iter().map(|&v| vec![Cell::ok(v)]).collect(),
    };
    Ok(MonotonicityReport { series, assertions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::random::{random_psd, trial_rng};

    fn unit() -> CoefficientField {
        CoefficientField::scalar(0.0, 1.0, 1.0, 0.0, 1.0).unwrap()
    }

    fn neumann_chart() -> ChartRepr {
        ChartRepr::new(vec![], CMatrix::zeros(2, 2)).unwrap()
    }

    const HS: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];

    #[test]
    fn neumann_slope_two() {
        let r = run_derivative_check(&unit(), &neumann_chart(), &CMatrix::identity(2), &HS, 0).unwrap();
        assert!((r.predicted - 2.0).abs() < 1e-9, "{}", r.predicted);
        assert!(r.passed(), "{:?}", r.assertions);
        assert!((r.extrapolated - 2.0).abs() < 1e-6);
    }

    #[test]
    fn neumann_partial_direction_and_zero() {
        let r = run_derivative_check(&unit(), &neumann_chart(), &CMatrix::from_real_diagonal(&[1.0, 0.0]), &HS, 0).unwrap();
        assert!((r.predicted - 1.0).abs() < 1e-9);
        assert!(r.passed(), "{:?}", r.assertions);
        let r = run_derivative_check(&unit(), &neumann_chart(), &CMatrix::zeros(2, 2), &HS, 0).unwrap();
        assert_eq!(r.predicted, 0.0);
        assert!(r.passed());
    }

    #[test]
    fn monotone_examples() {
        let f = unit();
        let r = run_monotonicity_check(&f, &neumann_chart(), &CMatrix::identity(2), &[1.0], 0).unwrap();
        let v: Vec<f64> = r.series.cells.iter().map(|c| c[0].value.unwrap()).collect();
        assert!(v[0].abs() < 1e-9 && v[1] > 0.0);
        let r = run_monotonicity_check(&f, &neumann_chart(), &CMatrix::zeros(2, 2), &[0.5, 1.0], 0).unwrap();
        assert!(r.passed());
        let chart = ChartRepr::new(vec![], CMatrix::zeros(4, 4)).unwrap();
        let f2 = crate::model::decoupled_field(
            vec![0.0, 1.0],
            &[vec![crate::model::ScalarCoefficients::new(1.0, 0.0, 1.0)], vec![crate::model::ScalarCoefficients::new(1.0, 2.0, 1.0)]],
        )
        .unwrap();
        let h = random_psd(&mut trial_rng(5, 0), 4, 2);
        let r = run_monotonicity_check(&f2, &chart, &h, &[0.1, 0.2, 0.4, 0.8, 1.6], 1).unwrap();
        assert!(r.passed(), "{:?}", r.assertions);
        assert!(run_monotonicity_check(&f, &neumann_chart(), &CMatrix::from_real_diagonal(&[1.0, -1.0]), &[1.0], 0).is_err());
        // S_K = [-1] crosses zero at t = 1.
        let crossing = ChartRepr::new(vec![0], CMatrix::from_real_diagonal(&[-1.0, 0.0])).unwrap();
        let e = run_monotonicity_check(&f, &crossing, &CMatrix::identity(2), &[0.5, 2.0], 0);
        assert!(matches!(e, Err(ExperimentError::StrataMismatch(..))));
    }
}
