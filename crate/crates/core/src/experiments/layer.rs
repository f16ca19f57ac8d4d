//! Eigenvalue continuity along paths inside one stratum.

use rayon::prelude::*;
use serde_json::json;

use super::{eigen_cells, Assertion, ExperimentError, Report, ScanOptions, Series, Status};
use crate::bc::{connect_in_chart, connect_within_stratum, express_in_chart, BoundaryCondition};
use crate::model::CoefficientField;

/// Samples at `steps` and `2·steps` intervals and the resulting jump bounds.
#[derive(Debug, Clone)]
pub struct LayerReport {
    pub coarse: Series,
    pub fine: Series,
    pub coarse_jump: f64,
    pub fine_jump: f64,
    pub assertions: Vec<Assertion>,
}

impl Report for LayerReport {
    fn name(&self) -> &str {
        "layer-path"
    }

    fn series(&self) -> Vec<&Series> {
        vec![&self.coarse, &self.fine]
    }

    fn assertions(&self) -> &[Assertion] {
        &self.assertions
    }

    fn extra(&self) -> serde_json::Value {
        json!({ "coarse_jump": self.coarse_jump, "fine_jump": self.fine_jump })
    }
}

/// Largest change of any branch between adjacent samples; infinite if a cell is missing.
fn max_jump(series: &Series) -> f64 {
    let mut worst = 0.0f64;
    for w in series.cells.windows(2) {
        for (a, b) in w[0].iter().zip(&w[1]) {
            match (a.finite(), b.finite()) {
                (Some(x), Some(y)) => worst = worst.max((y - x).abs()),
                _ => return f64::INFINITY,
            }
        }
    }
    worst
}

/// Samples `λ₁ … λ_m` along a path from `bc1` to `bc2` inside one stratum.
///
/// With `chart = Some(K)` both conditions are expressed in chart `K` and
/// joined there; otherwise each is decomposed and their labels must agree.
pub fn run_layer_continuity(
    field: &CoefficientField,
    bc1: &BoundaryCondition,
    bc2: &BoundaryCondition,
    chart: Option<&[usize]>,
    steps: usize,
    m: usize,
    opts: &ScanOptions,
) -> Result<LayerReport, ExperimentError> {
    if steps == 0 {
        return Err(ExperimentError::Invalid("steps must be positive".into()));
    }
    let point = |tau: f64| -> Result<BoundaryCondition, ExperimentError> {
        match chart {
            Some(k) => {
                let c1 = express_in_chart(bc1, k)?;
                let c2 = express_in_chart(bc2, k)?;
                Ok(connect_in_chart(k, &c1.s, &c2.s, tau, None)?.compose())
            }
            None => Ok(connect_within_stratum(bc1, bc2, tau, None)?),
        }
    };
    // Fails early with StrataMismatch.
    point(0.0)?;
    let run = |n: usize, label: &str| -> Result<Series, ExperimentError> {
        let points: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64).collect();
        let bcs = points.iter().map(|&t| point(t)).collect::<Result<Vec<_>, _>>()?;
        let cells = bcs.par_iter().map(|bc| eigen_cells(field, bc, m, opts)).collect();
        Ok(Series { label: label.into(), param: "tau".into(), points, cells })
    };
    let coarse = run(steps, "coarse")?;
    let fine = run(2 * steps, "fine")?;
    let (cj, fj) = (max_jump(&coarse), max_jump(&fine));
    let bad = coarse.cells.iter().chain(&fine.cells).flatten().filter(|c| c.status != Status::Ok).count();
    let mut assertions = vec![Assertion::new("no_divergence", bad == 0, format!("{bad} diverged or failed samples"))];
    // A path with no measurable variation passes trivially.
    let flat = cj <= 1e-9 * (1.0 + max_abs(&coarse));
    let ratio = fj / cj;
    assertions.push(Assertion::new(
        "refinement_ratio",
        flat || ratio < 0.75,
        format!("max adjacent jump {cj:.4e} with {steps} steps, {fj:.4e} with {} steps (ratio {ratio:.3})", 2 * steps),
    ));
    Ok(LayerReport { coarse, fine, coarse_jump: cj, fine_jump: fj, assertions })
}

fn max_abs(series: &Series) -> f64 {
    series.cells.iter().flatten().filter_map(|c| c.value).fold(0.0, |m, v| m.max(v.abs()))
}
