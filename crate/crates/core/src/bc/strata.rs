//! Strata `J^(n⁰,n⁺,n⁻)` and the canonical singular conditions.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::chart::{check_index_set, ChartRepr};
use super::{chart_decompose, express_in_chart, BcError, BoundaryCondition};
use crate::kernel::{default_zero_tol, hermitian_eigenvalues, hermitian_inertia, CMatrix, Inertia};

/// Chart index set and inertia of `S_K`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StratumLabel {
    pub k: Vec<usize>,
    pub inertia: Inertia,
}

impl fmt::Display for StratumLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k: Vec<String> = self.k.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "K={{{}}} {}", k.join(","), self.inertia)
    }
}

fn label_of(chart: &ChartRepr, tol_zero: Option<f64>) -> StratumLabel {
    let s_k = chart.s_k();
    let tol = tol_zero.unwrap_or_else(|| default_zero_tol(&s_k));
    let inertia = hermitian_inertia(&s_k, tol).expect("chart coordinates are Hermitian");
    StratumLabel { k: chart.k.clone(), inertia }
}

/// Label in the chart chosen by [`chart_decompose`]. `tol_zero = None` uses
/// the kernel default band.
pub fn stratum_label(bc: &BoundaryCondition, tol_zero: Option<f64>) -> StratumLabel {
    label_of(&chart_decompose(bc), tol_zero)
}

/// Label relative to a prescribed chart `K`.
pub fn stratum_label_in(bc: &BoundaryCondition, k: &[usize], tol_zero: Option<f64>) -> Result<StratumLabel, BcError> {
    Ok(label_of(&express_in_chart(bc, k)?, tol_zero))
}

/// Distance between the zero band and the smallest nonzero-class eigenvalue
/// modulus of `S_K`; negative values never occur. `None` when `S_K` has no
/// eigenvalue outside the band.
pub fn stratum_margin(bc: &BoundaryCondition, tol_zero: Option<f64>) -> Option<f64> {
    let chart = chart_decompose(bc);
    let s_k = chart.s_k();
    let tol = tol_zero.unwrap_or_else(|| default_zero_tol(&s_k));
    hermitian_eigenvalues(&s_k)
        .expect("chart coordinates are Hermitian")
        .into_iter()
        .map(f64::abs)
        .filter(|&m| m > tol)
        .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |a| a.min(m))))
        .map(|m| m - tol)
}

fn diag_condition(d: usize, b_diag: &[f64]) -> BoundaryCondition {
    let n = 2 * d;
    let a = CMatrix::identity(n).scale_real(-1.0);
    let b = CMatrix::from_real_diagonal(b_diag);
    debug_assert_eq!(b_diag.len(), n);
    BoundaryCondition::new(a, b).expect("diagonal condition is self-adjoint")
}

fn check_partition(k: &[usize], p: Inertia, d: usize) -> Result<(), BcError> {
    check_index_set(k, 2 * d).map_err(|e| BcError::InvalidPartition(e.to_string()))?;
    if p.dim() != k.len() {
        return Err(BcError::InvalidPartition(format!("{p} does not sum to #K = {}", k.len())));
    }
    Ok(())
}

/// `[−I | diag(b)]` with `b = 0` on the first `n0` indices of `K`, `+1` on
/// the next `nplus` and off `K`, `−1` on the last `nminus`.
pub fn canonical_singular(k: &[usize], partition: Inertia, d: usize) -> Result<BoundaryCondition, BcError> {
    check_partition(k, partition, d)?;
    let mut b = vec![1.0; 2 * d];
    for (pos, &l) in k.iter().enumerate() {
        b[l] = if pos < partition.n_zero {
            0.0
        } else if pos < partition.n_zero + partition.n_plus {
            1.0
        } else {
            -1.0
        };
    }
    Ok(diag_condition(d, &b))
}

/// Point at parameter `s ∈ (0, 1]` of the straight path from stratum
/// `source` towards `canonical_singular(K, target)`.
pub fn approach_path(k: &[usize], target: Inertia, source: Inertia, s: f64, d: usize) -> Result<BoundaryCondition, BcError> {
    check_partition(k, target, d)?;
    check_partition(k, source, d)?;
    if !(source.n_zero < target.n_zero && source.n_plus >= target.n_plus && source.n_minus >= target.n_minus) {
        return Err(BcError::InvalidPartition(format!(
            "source {source} must have fewer zeros and at least as many positive and negative entries as target {target}"
        )));
    }
    if !(s > 0.0 && s <= 1.0) {
        return Err(BcError::InvalidPartition(format!("s = {s} outside (0, 1]")));
    }
    let jump = source.n_plus - target.n_plus;
    let mut b = vec![1.0; 2 * d];
    for (pos, &l) in k.iter().enumerate() {
        b[l] = if pos < source.n_zero {
            0.0
        } else if pos < source.n_zero + jump {
            s
        } else if pos < target.n_zero {
            -s
        } else if pos < target.n_zero + target.n_plus {
            1.0
        } else {
            -1.0
        };
    }
    Ok(diag_condition(d, &b))
}

/// All `(target, source)` pairs on a chart of size `m` with `target.n_zero = m`
/// that satisfy the approach preconditions.
pub fn full_chart_partition_pairs(m: usize) -> Vec<(Inertia, Inertia)> {
    let target = Inertia::new(m, 0, 0);
    let mut out = Vec::new();
    for n0 in 0..m {
        for np in 0..=(m - n0) {
            out.push((target, Inertia::new(n0, np, m - n0 - np)));
        }
    }
    out
}
