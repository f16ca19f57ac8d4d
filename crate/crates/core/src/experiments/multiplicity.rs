//! Analytic versus geometric multiplicity on random problems.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::random::{random_chart, random_field, trial_rng};
use super::{Assertion, Cell, ExperimentError, Report, Series};
use crate::bc::{BcDocument, BoundaryCondition};
use crate::model::CoefficientField;
use crate::shooting::{geometric_multiplicity, ContourConfig, Counter, Solver};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplicityEntry {
    pub trial: usize,
    /// 1-based index of the first eigenvalue in the cluster.
    pub index: usize,
    pub value: f64,
    pub analytic: Option<usize>,
    pub geometric: Option<usize>,
    pub pass: bool,
    /// Field and condition JSON for failing entries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reproduction: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct MultiplicityReport {
    pub seed: u64,
    pub entries: Vec<MultiplicityEntry>,
    pub series: Series,
    pub assertions: Vec<Assertion>,
}

impl Report for MultiplicityReport {
    fn name(&self) -> &str {
        "multiplicity-check"
    }

    fn series(&self) -> Vec<&Series> {
        vec![&self.series]
    }

    fn assertions(&self) -> &[Assertion] {
        &self.assertions
    }

    fn extra(&self) -> serde_json::Value {
        json!({ "seed": self.seed, "entries": self.entries })
    }
}

/// `(value, analytic, geometric)` for the clusters covering the first `m` eigenvalues.
pub fn check_multiplicities(
    field: &CoefficientField,
    bc: &BoundaryCondition,
    m: usize,
    value_tol: f64,
) -> Result<Vec<(f64, usize, usize)>, ExperimentError> {
    let mut solver = Solver::new(field, bc)?.with_tolerance(value_tol);
    let slice = solver.lowest_slice(m + 1)?;
    let clusters = &slice.eigenvalues;
    let mut out = Vec::new();
    let mut seen = 0;
    let mut counter = Counter::new(field, bc, ContourConfig::default())?;
    for (j, &(x, _)) in clusters.iter().enumerate() {
        if seen >= m {
            break;
        }
        let left = if j > 0 { x - clusters[j - 1].0 } else { x - slice.r1 };
        let right = clusters.get(j + 1).map_or(slice.r2 - x, |c| c.0 - x);
        let radius = (0.5 * left.min(right)).min(1.0);
        let analytic = counter.circle(x, radius)?;
        let geometric = geometric_multiplicity(field, bc, x)?;
        out.push((x, analytic, geometric));
        seen += clusters[j].1;
    }
    Ok(out)
}

/// `trials` random problems of dimension `d`, first `m` eigenvalues each.
pub fn run_multiplicity_check(seed: u64, trials: usize, d: usize, m: usize, value_tol: f64) -> Result<MultiplicityReport, ExperimentError> {
    if d == 0 || m == 0 {
        return Err(ExperimentError::Invalid("dimension and eigenvalue count must be positive".into()));
    }
    let per_trial: Vec<Vec<MultiplicityEntry>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let pieces = 1 + (t % 3);
            let field = random_field(&mut rng, d, pieces, 5.0);
            let chart = random_chart(&mut rng, d, 1.5);
            let bc = chart.compose();
            let repro = || json!({ "field": serde_json::from_str::<serde_json::Value>(&field.to_json()).ok(), "bc": serde_json::from_str::<serde_json::Value>(&BcDocument::from_chart(&chart).to_json()).ok() });
            match check_multiplicities(&field, &bc, m, value_tol) {
                Ok(rows) => {
                    let mut index = 1;
                    rows.into_iter()
                        .map(|(value, a, g)| {
                            let pass = a == g && a > 0;
                            let e = MultiplicityEntry {
                                trial: t,
                                index,
                                value,
                                analytic: Some(a),
                                geometric: Some(g),
                                pass,
                                reproduction: (!pass).then(repro),
                                error: None,
                            };
                            index += a.max(1);
                            e
                        })
                        .collect()
                }
                Err(err) => vec![MultiplicityEntry {
                    trial: t,
                    index: 0,
                    value: f64::NAN,
                    analytic: None,
                    geometric: None,
                    pass: false,
                    reproduction: Some(repro()),
                    error: Some(err.to_string()),
                }],
            }
        })
        .collect();
    let entries: Vec<MultiplicityEntry> = per_trial.into_iter().flatten().collect();
    let failures = entries.iter().filter(|e| !e.pass).count();
    let checked = entries.iter().filter_map(|e| e.analytic).sum::<usize>();
    let assertions = vec![Assertion::new(
        "multiplicity_equality",
        failures == 0,
        format!("{failures} mismatching or failed entries; {checked} eigenvalues over {trials} trials"),
    )];
    let series = Series {
        label: "multiplicity".into(),
        param: "trial".into(),
        points: entries.iter().map(|e| e.trial as f64).collect(),
        cells: entries
            .iter()
            .map(|e| {
                let mut c = if e.value.is_finite() { Cell::ok(e.value) } else { Cell::failed(String::new()) };
                if !e.pass {
                    c.status = super::Status::Failed;
                }
                c.note = Some(format!("{}:{}", e.analytic.unwrap_or(0), e.geometric.unwrap_or(0)));
                vec![c]
            })
            .collect(),
    };
    Ok(MultiplicityReport { seed, entries, series, assertions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{decoupled_field, ScalarCoefficients};
    use std::f64::consts::PI;

    #[test]
    fn double_dirichlet_is_double() {
        let c = ScalarCoefficients::new(1.0, 0.0, 1.0);
        let f = decoupled_field(vec![0.0, 1.0], &[vec![c], vec![c]]).unwrap();
        let rows = check_multiplicities(&f, &BoundaryCondition::dirichlet(2), 2, 1e-10).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].0 - PI * PI).abs() < 1e-8);
        assert_eq!((rows[0].1, rows[0].2), (2, 2));
    }

    #[test]
    fn scalar_and_split_spectra_are_simple() {
        let f = CoefficientField::scalar(0.0, 1.0, 1.0, 0.0, 1.0).unwrap();
        let rows = check_multiplicities(&f, &BoundaryCondition::dirichlet(1), 5, 1e-10).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.1 == 1 && r.2 == 1));
        let f2 = decoupled_field(
            vec![0.0, 1.0],
            &[vec![ScalarCoefficients::new(1.0, 0.0, 1.0)], vec![ScalarCoefficients::new(1.0, 3.0, 1.0)]],
        )
        .unwrap();
        let rows = check_multiplicities(&f2, &BoundaryCondition::dirichlet(2), 4, 1e-10).unwrap();
        assert!(rows.iter().all(|r| r.1 == 1 && r.2 == 1), "{rows:?}");
    }

    #[test]
    fn small_random_run_passes() {
        let r = run_multiplicity_check(3, 3, 1, 3, 1e-10).unwrap();
        assert!(r.passed(), "{:?}", r.entries);
    }
}
