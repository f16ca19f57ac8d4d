//! Batch experiments on eigenvalue behaviour under boundary-condition changes.
//!
//! Each `run_*` function returns a report holding sampled eigenvalue series
//! and named pass/fail assertions; [`emit`] writes them as CSV, SVG and a JSON
//! summary.

mod derivative;
mod emit;
mod layer;
mod multiplicity;
pub mod random;
mod scan;

use serde::Serialize;
use thiserror::Error;

use crate::bc::BcError;
use crate::kernel::KernelError;
use crate::model::ModelError;
use crate::shooting::{ShootingError, Solver};

pub use derivative::{run_derivative_check, run_monotonicity_check, DerivativeReport, DerivativeRow, MonotonicityReport};
pub use emit::{emit, to_csv, to_json_summary, to_svg, Format};
pub use layer::{run_layer_continuity, LayerReport};
pub use multiplicity::{check_multiplicities, run_multiplicity_check, MultiplicityEntry, MultiplicityReport};
pub use scan::{default_s_values, run_homotopy_scan, run_jump_scan, run_rellich, JumpScanReport};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid partition: {0}")]
    PartitionInvalid(String),
    #[error("boundary conditions lie in different strata: {0} vs {1}")]
    StrataMismatch(String, String),
    #[error("eigenvalue {value} has analytic multiplicity {multiplicity}")]
    NotSimple { value: f64, multiplicity: usize },
    #[error("branch tracking ambiguous at parameter {param}: nearest match {distance:e} exceeds half gap {half_gap:e}")]
    BranchTrackingAmbiguous { param: f64, distance: f64, half_gap: f64 },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Bc(BcError),
    #[error(transparent)]
    Shooting(#[from] ShootingError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

impl From<BcError> for ExperimentError {
    fn from(e: BcError) -> Self {
        match e {
            BcError::InvalidPartition(m) => ExperimentError::PartitionInvalid(m),
            BcError::StrataMismatch(a, b) => ExperimentError::StrataMismatch(a, b),
            other => ExperimentError::Bc(other),
        }
    }
}

/// A named pass/fail check with a human-readable detail line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.to_string(), pass, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Ok,
    Diverged,
    Failed,
}

/// One sampled eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub value: Option<f64>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Cell {
    pub fn ok(v: f64) -> Self {
        Self { value: Some(v), status: Status::Ok, note: None }
    }

    pub fn diverged(v: Option<f64>) -> Self {
        Self { value: v, status: Status::Diverged, note: None }
    }

    pub fn failed(note: String) -> Self {
        Self { value: None, status: Status::Failed, note: Some(note) }
    }

    /// Value of a cell that is neither diverged nor failed.
    pub fn finite(&self) -> Option<f64> {
        match self.status {
            Status::Ok => self.value,
            _ => None,
        }
    }
}

/// Eigenvalue branches sampled along a parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub label: String,
    /// Name of the parameter column in CSV output.
    pub param: String,
    pub points: Vec<f64>,
    /// `cells[i][n]` is branch `n` at `points[i]`.
    pub cells: Vec<Vec<Cell>>,
}

/// Common view used by [`emit`].
pub trait Report {
    fn name(&self) -> &str;
    fn series(&self) -> Vec<&Series>;
    fn assertions(&self) -> &[Assertion];
    /// Experiment-specific data for the JSON summary.
    fn extra(&self) -> serde_json::Value {
        serde_json::Value::Null
    }
    fn passed(&self) -> bool {
        self.assertions().iter().all(|a| a.pass)
    }
}

/// Shared numerical settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanOptions {
    /// Values below this count as diverged.
    pub divergence_floor: f64,
    /// Convergence tolerance relative to `max(1, |λ|)`.
    pub conv_rtol: f64,
    pub value_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { divergence_floor: -1.0e6, conv_rtol: 1e-3, value_tol: 1e-9 }
    }
}

/// The lowest `m` eigenvalues as cells, with divergence marking.
pub(crate) fn eigen_cells(
    field: &crate::model::CoefficientField,
    bc: &crate::bc::BoundaryCondition,
    m: usize,
    opts: &ScanOptions,
) -> Vec<Cell> {
    let run = || -> Result<Vec<f64>, ShootingError> { Solver::new(field, bc)?.with_tolerance(opts.value_tol).lowest(m) };
    match run() {
        Ok(v) => v
            .into_iter()
            .map(|x| if x < opts.divergence_floor { Cell::diverged(Some(x)) } else { Cell::ok(x) })
            .collect(),
        Err(ShootingError::SearchExhausted { .. }) => vec![Cell::diverged(None); m],
        Err(e) => vec![Cell::failed(e.to_string()); m],
    }
}

pub(crate) fn fmt_values(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.10}")).collect();
    format!("[{}]", parts.join(", "))
}
