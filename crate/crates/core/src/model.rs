//! Piecewise-constant matrix Sturm–Liouville coefficients.
//!
//! A [`CoefficientField`] holds `(P, Q, W)` on `[a, b]`: one real symmetric
//! `d×d` matrix per piece and coefficient, with `P` and `W` positive definite.
//! The positivity bounds `μ₁`, `μ₂` are computed from the data.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative asymmetry below which a full matrix is silently symmetrized.
pub const SYMMETRIZE_RTOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("piece {piece}: {condition}")]
    HypothesisViolation { piece: usize, condition: Violation },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// The condition a piece failed.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    PNotPositive { min_eigenvalue: f64 },
    WNotPositive { min_eigenvalue: f64 },
    NotSymmetric { which: char, asymmetry: f64 },
    NonFinite { which: char },
    WrongShape { which: char, expected: usize },
    Breakpoints(String),
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::PNotPositive { min_eigenvalue } => {
                write!(f, "P is not positive definite (min eigenvalue {min_eigenvalue:e})")
            }
            Violation::WNotPositive { min_eigenvalue } => {
                write!(f, "W is not positive definite (min eigenvalue {min_eigenvalue:e})")
            }
            Violation::NotSymmetric { which, asymmetry } => {
                write!(f, "{which} is not symmetric (asymmetry {asymmetry:e})")
            }
            Violation::NonFinite { which } => write!(f, "{which} has a non-finite entry"),
            Violation::WrongShape { which, expected } => write!(f, "{which} is not {expected}x{expected}"),
            Violation::Breakpoints(msg) => write!(f, "bad breakpoints: {msg}"),
        }
    }
}

/// Coefficients on one constant piece.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub p: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub w: DMatrix<f64>,
    p_inv: DMatrix<f64>,
}

impl Piece {
    pub fn p_inv(&self) -> &DMatrix<f64> {
        &self.p_inv
    }
}

/// Validated `(P, Q, W)` on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    dim: usize,
    breakpoints: Vec<f64>,
    pieces: Vec<Piece>,
    mu1: f64,
    mu2: f64,
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

fn check_matrix(m: &DMatrix<f64>, which: char, d: usize, piece: usize) -> Result<(), ModelError> {
    let fail = |condition| Err(ModelError::HypothesisViolation { piece, condition });
    if m.nrows() != d || m.ncols() != d {
        return fail(Violation::WrongShape { which, expected: d });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return fail(Violation::NonFinite { which });
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRIZE_RTOL * scale {
        return fail(Violation::NotSymmetric { which, asymmetry: asym });
    }
    Ok(())
}

impl CoefficientField {
    /// Validates piecewise data. `breakpoints` has one more entry than `pieces`.
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)>) -> Result<Self, ModelError> {
        let bad = |msg: &str| ModelError::HypothesisViolation { piece: 0, condition: Violation::Breakpoints(msg.into()) };
        if pieces.is_empty() {
            return Err(bad("no pieces"));
        }
        if breakpoints.len() != pieces.len() + 1 {
            return Err(bad("expected one more breakpoint than pieces"));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("breakpoints must be finite and strictly increasing"));
        }
        let d = pieces[0].0.nrows();
        if d == 0 {
            return Err(bad("dimension must be at least 1"));
        }
        let mut mu1 = f64::INFINITY;
        let mut mu2 = f64::INFINITY;
        let mut out = Vec::with_capacity(pieces.len());
        for (k, (p, q, w)) in pieces.into_iter().enumerate() {
            check_matrix(&p, 'P', d, k)?;
            check_matrix(&q, 'Q', d, k)?;
            check_matrix(&w, 'W', d, k)?;
            let sym = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;
            let (p, q, w) = (sym(p), sym(q), sym(w));
            let pmin = min_eigenvalue(&p);
            if !(pmin > 0.0) {
                return Err(ModelError::HypothesisViolation { piece: k, condition: Violation::PNotPositive { min_eigenvalue: pmin } });
            }
            let wmin = min_eigenvalue(&w);
            if !(wmin > 0.0) {
                return Err(ModelError::HypothesisViolation { piece: k, condition: Violation::WNotPositive { min_eigenvalue: wmin } });
            }
            mu1 = mu1.min(pmin);
            mu2 = mu2.min(wmin);
            let p_inv = p.clone().try_inverse().expect("positive definite matrix is invertible");
            let p_inv = (&p_inv + p_inv.transpose()) * 0.5;
            out.push(Piece { p, q, w, p_inv });
        }
        Ok(Self { dim: d, breakpoints, pieces: out, mu1, mu2 })
    }

    /// Single piece with constant coefficients on `[a, b]`.
    pub fn constant(a: f64, b: f64, p: DMatrix<f64>, q: DMatrix<f64>, w: DMatrix<f64>) -> Result<Self, ModelError> {
        Self::new(vec![a, b], vec![(p, q, w)])
    }

    /// Scalar field `-(p y')' + q y = λ w y` with constant coefficients.
    pub fn scalar(a: f64, b: f64, p: f64, q: f64, w: f64) -> Result<Self, ModelError> {
        let m = |x| DMatrix::from_element(1, 1, x);
        Self::constant(a, b, m(p), m(q), m(w))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn b(&self) -> f64 {
        *self.breakpoints.last().expect("at least two breakpoints")
    }

    pub fn length(&self) -> f64 {
        self.b() - self.a()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Lower bound of `P` over all pieces.
    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    /// Lower bound of `W` over all pieces.
    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    /// `max(0, -min eig Q)` over all pieces.
    pub fn q_minus(&self) -> f64 {
        self.pieces.iter().map(|pc| (-min_eigenvalue(&pc.q)).max(0.0)).fold(0.0, f64::max)
    }

    /// Index of the piece containing `t` (right-continuous, last piece closed).
    pub fn piece_index(&self, t: f64) -> usize {
        let n = self.pieces.len();
        (0..n).find(|&k| t < self.breakpoints[k + 1]).unwrap_or(n - 1)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.dim == other.dim && self.breakpoints == other.breakpoints
    }

    /// Parses a problem document.
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: ProblemDoc = serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
        doc.into_field()
    }

    pub fn to_json(&self) -> String {
        let to_rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..=i).map(|j| m[(i, j)]).collect()).collect()
        };
        let doc = ProblemDoc {
            dim: self.dim,
            interval: [self.a(), self.b()],
            breakpoints: Some(self.breakpoints.clone()),
            pieces: self
                .pieces
                .iter()
                .map(|pc| PieceDoc { p: to_rows(&pc.p), q: to_rows(&pc.q), w: to_rows(&pc.w) })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("problem document serializes")
    }
}

/// Loads a problem from a file path, or from inline JSON text when the
/// argument starts with `{`.
pub fn load_problem(path_or_text: &str) -> Result<CoefficientField, ModelError> {
    let trimmed = path_or_text.trim_start();
    if trimmed.starts_with('{') {
        CoefficientField::from_json(trimmed)
    } else {
        let text = std::fs::read_to_string(Path::new(path_or_text))?;
        CoefficientField::from_json(&text)
    }
}

/// Coefficients of one scalar problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarCoefficients {
    pub p: f64,
    pub q: f64,
    pub w: f64,
}

impl ScalarCoefficients {
    pub fn new(p: f64, q: f64, w: f64) -> Self {
        Self { p, q, w }
    }
}

/// Diagonal field `diag(p_jj)`, `diag(q_jj)`, `diag(w_jj)` built from scalar
/// problems. Each entry of `scalars` lists per-piece coefficients on the
/// shared `breakpoints`.
pub fn decoupled_field(breakpoints: Vec<f64>, scalars: &[Vec<ScalarCoefficients>]) -> Result<CoefficientField, ModelError> {
    let d = scalars.len();
    let n_pieces = breakpoints.len().saturating_sub(1);
    if d == 0 || scalars.iter().any(|s| s.len() != n_pieces) {
        return Err(ModelError::Parse("each scalar problem needs one coefficient triple per piece".into()));
    }
    let pieces = (0..n_pieces)
        .map(|k| {
            let diag = |f: fn(&ScalarCoefficients) -> f64| {
                DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d, scalars.iter().map(|s| f(&s[k]))))
            };
            (diag(|c| c.p), diag(|c| c.q), diag(|c| c.w))
        })
        .collect();
    CoefficientField::new(breakpoints, pieces)
}

/// Convex combination `τ·target + (1−τ)·source` of two fields on one grid.
#[derive(Debug, Clone)]
pub struct HomotopyPoint<'a> {
    pub tau: f64,
    pub source: &'a CoefficientField,
    pub target: &'a CoefficientField,
}

impl HomotopyPoint<'_> {
    pub fn evaluate(&self) -> Result<CoefficientField, ModelError> {
        if !self.source.same_grid(self.target) {
            return Err(ModelError::Parse("homotopy endpoints must share dimension and breakpoints".into()));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(ModelError::Parse(format!("tau {} outside [0, 1]", self.tau)));
        }
        let t = self.tau;
        let mix = |x: &DMatrix<f64>, y: &DMatrix<f64>| {
            if t == 0.0 {
                x.clone()
            } else if t == 1.0 {
                y.clone()
            } else {
                x * (1.0 - t) + y * t
            }
        };
        let pieces = self
            .source
            .pieces
            .iter()
            .zip(&self.target.pieces)
            .map(|(s, g)| (mix(&s.p, &g.p), mix(&s.q, &g.q), mix(&s.w, &g.w)))
            .collect();
        CoefficientField::new(self.source.breakpoints.clone(), pieces)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PieceDoc {
    #[serde(rename = "P")]
    p: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ProblemDoc {
    dim: usize,
    interval: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    breakpoints: Option<Vec<f64>>,
    pieces: Vec<PieceDoc>,
}

/// Reads a lower triangle (row `i` has `i+1` entries) or a full matrix.
fn read_symmetric(rows: &[Vec<f64>], d: usize, which: char, piece: usize) -> Result<DMatrix<f64>, ModelError> {
    let violation = |condition| ModelError::HypothesisViolation { piece, condition };
    if rows.len() != d {
        return Err(violation(Violation::WrongShape { which, expected: d }));
    }
    let lower = rows.iter().enumerate().all(|(i, r)| r.len() == i + 1);
    let full = rows.iter().all(|r| r.len() == d);
    let mut m = DMatrix::zeros(d, d);
    if lower && !(full && d == 1) {
        for (i, r) in rows.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
    } else if full {
        for (i, r) in rows.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(violation(Violation::NonFinite { which }));
        }
        let asym = (&m - m.transpose()).amax();
        if asym > SYMMETRIZE_RTOL * m.amax().max(f64::MIN_POSITIVE) {
            return Err(violation(Violation::NotSymmetric { which, asymmetry: asym }));
        }
        if asym > 0.0 {
            log::warn!("piece {piece}: symmetrizing {which} (asymmetry {asym:e})");
            m = (&m + m.transpose()) * 0.5;
        }
    } else {
        return Err(violation(Violation::WrongShape { which, expected: d }));
    }
    Ok(m)
}

impl ProblemDoc {
    fn into_field(self) -> Result<CoefficientField, ModelError> {
        let [a, b] = self.interval;
        let breakpoints = match self.breakpoints {
            Some(bp) => bp,
            None if self.pieces.len() == 1 => vec![a, b],
            None => return Err(ModelError::Parse("breakpoints are required for more than one piece".into())),
        };
        if breakpoints.first() != Some(&a) || breakpoints.last() != Some(&b) {
            return Err(ModelError::Parse("breakpoints must start at a and end at b".into()));
        }
        let d = self.dim;
        if d == 0 {
            return Err(ModelError::Parse("dim must be at least 1".into()));
        }
        let pieces = self
            .pieces
            .iter()
            .enumerate()
            .map(|(k, pc)| {
                Ok((
                    read_symmetric(&pc.p, d, 'P', k)?,
                    read_symmetric(&pc.q, d, 'Q', k)?,
                    read_symmetric(&pc.w, d, 'W', k)?,
                ))
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        CoefficientField::new(breakpoints, pieces)
    }
}
