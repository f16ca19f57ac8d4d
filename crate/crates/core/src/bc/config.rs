//! JSON documents for boundary conditions.
//!
//! Two shapes are accepted:
//!
//! ```json
//! {"dim": 1, "A": [[[1,0],[0,0]], [[0,0],[1,0]]], "B": [[[0,0],[0,0]], [[0,0],[0,0]]]}
//! {"K": [1, 2], "S": [[0, 0], [0, 0.5]]}
//! ```
//!
//! Entries are `[re, im]` pairs or plain reals. Chart indices are 1-based.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BcError, BoundaryCondition, ChartRepr};
use crate::kernel::CMatrix;

/// A matrix entry: a real number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Real(x) => Complex64::new(x, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }

    fn from_value(z: Complex64) -> Self {
        Entry::Complex([z.re, z.im])
    }
}

/// A boundary condition document in matrix or chart form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BcDocument {
    Matrix {
        dim: usize,
        #[serde(rename = "A")]
        a: Vec<Vec<Entry>>,
        #[serde(rename = "B")]
        b: Vec<Vec<Entry>>,
    },
    Chart {
        #[serde(default)]
        dim: Option<usize>,
        #[serde(rename = "K")]
        k: Vec<usize>,
        #[serde(rename = "S")]
        s: Vec<Vec<Entry>>,
    },
}

fn to_matrix(rows: &[Vec<Entry>], n: usize, name: &str) -> Result<CMatrix, BcError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(BcError::Parse(format!("{name} must be {n}x{n}")));
    }
    let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().map(|e| e.value()).collect()).collect();
    Ok(CMatrix::from_rows(&rows)?)
}

fn from_matrix(m: &CMatrix) -> Vec<Vec<Entry>> {
    m.to_rows().into_iter().map(|r| r.into_iter().map(Entry::from_value).collect()).collect()
}

impl BcDocument {
    pub fn parse(text: &str) -> Result<Self, BcError> {
        serde_json::from_str(text).map_err(|e| BcError::Parse(e.to_string()))
    }

    /// Chart form when the document was given as one.
    pub fn chart(&self) -> Result<Option<ChartRepr>, BcError> {
        match self {
            BcDocument::Matrix { .. } => Ok(None),
            BcDocument::Chart { dim, k, s } => {
                let n = s.len();
                if let Some(d) = dim {
                    if 2 * d != n {
                        return Err(BcError::Parse(format!("S has {n} rows, expected {}", 2 * d)));
                    }
                }
                if k.contains(&0) {
                    return Err(BcError::InvalidIndexSet("chart indices are 1-based".into()));
                }
                let s = to_matrix(s, n, "S")?;
                let k0: Vec<usize> = k.iter().map(|i| i - 1).collect();
                Ok(Some(ChartRepr::new(k0, s)?))
            }
        }
    }

    pub fn to_condition(&self) -> Result<BoundaryCondition, BcError> {
        match self {
            BcDocument::Matrix { dim, a, b } => {
                let n = 2 * dim;
                BoundaryCondition::new(to_matrix(a, n, "A")?, to_matrix(b, n, "B")?)
            }
            BcDocument::Chart { .. } => Ok(self.chart()?.expect("chart form").compose()),
        }
    }

    pub fn from_condition(bc: &BoundaryCondition) -> Self {
        BcDocument::Matrix { dim: bc.dim(), a: from_matrix(bc.a()), b: from_matrix(bc.b()) }
    }

    pub fn from_chart(chart: &ChartRepr) -> Self {
        BcDocument::Chart { dim: Some(chart.dim), k: chart.k.iter().map(|i| i + 1).collect(), s: from_matrix(&chart.s) }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("boundary condition document serializes")
    }
}

/// Loads a boundary condition document from a path, or from inline JSON
/// text when the argument starts with `{`.
pub fn load_bc(path_or_text: &str) -> Result<BcDocument, BcError> {
    let trimmed = path_or_text.trim_start();
    let text = if trimmed.starts_with('{') {
        trimmed.to_string()
    } else {
        std::fs::read_to_string(Path::new(path_or_text)).map_err(|e| BcError::Parse(format!("{path_or_text}: {e}")))?
    };
    BcDocument::parse(&text)
}
