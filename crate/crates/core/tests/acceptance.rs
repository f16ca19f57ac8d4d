//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line; the test
//! fails if any criterion fails.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::Rng;
use slp_core::bc::{
    chart_compose, chart_decompose, full_chart_partition_pairs, layer_index, stratum_label, stratum_label_in,
    BoundaryCondition, ChartRepr,
};
use slp_core::experiments::random::{random_chart, random_field, random_hermitian, random_psd, trial_rng};
use slp_core::experiments::{
    run_derivative_check, run_jump_scan, run_layer_continuity, run_monotonicity_check, run_multiplicity_check,
    run_rellich, default_s_values, ExperimentError, Report, ScanOptions,
};
use slp_core::kernel::{rank_tol, CMatrix};
use slp_core::model::{decoupled_field, CoefficientField, ScalarCoefficients};
use slp_core::shooting::{gamma, Solver};
use slp_core::Complex64;

// Pinned tolerances and budgets.
const CLOSED_FORM_RTOL: f64 = 1e-8;
const CLOSED_FORM_BUDGET: Duration = Duration::from_secs(5);
const MULTIPLICITY_BUDGET: Duration = Duration::from_secs(120);
const RELLICH_FLOOR: f64 = -1.5e7;
const RELLICH_LEADING_RTOL: f64 = 0.2;
const JUMP_CONV_TOL: f64 = 1e-3;
const JUMP_BUDGET: Duration = Duration::from_secs(600);
const LAYER_RATIO: f64 = 0.75;
const DERIVATIVE_ORDER: f64 = 1.9;
const DERIVATIVE_LIMIT_RTOL: f64 = 1e-6;
const MONOTONE_SLACK: f64 = -1e-9;
const ROUND_TRIP_RANK_RTOL: f64 = 1e-9;
const DECOUPLING_RTOL: f64 = 1e-8;

struct Outcome {
    pass: bool,
    detail: String,
}

/// Writes straight to stdout so the line shows even when test output is captured.
fn report(id: usize, name: &str, started: Instant, out: Outcome) -> bool {
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(
        stdout,
        "criterion {id} [{name}]: {} ({:.2}s) {}",
        if out.pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64(),
        out.detail
    );
    out.pass
}

fn unit() -> CoefficientField {
    CoefficientField::scalar(0.0, 1.0, 1.0, 0.0, 1.0).unwrap()
}

fn unit_d2() -> CoefficientField {
    let c = ScalarCoefficients::new(1.0, 0.0, 1.0);
    decoupled_field(vec![0.0, 1.0], &[vec![c], vec![c]]).unwrap()
}

fn closed_form() -> Outcome {
    let start = Instant::now();
    let f = unit();
    let dir = Solver::new(&f, &BoundaryCondition::dirichlet(1)).unwrap().lowest(10).unwrap();
    let neu = Solver::new(&f, &BoundaryCondition::neumann(1)).unwrap().lowest(10).unwrap();
    let mut worst = 0.0f64;
    for n in 1..=10 {
        let d_exact = (n as f64 * PI).powi(2);
        let n_exact = ((n - 1) as f64 * PI).powi(2);
        worst = worst.max((dir[n - 1] - d_exact).abs() / d_exact);
        // The Neumann ground state is 0; measure it against 1.
        worst = worst.max((neu[n - 1] - n_exact).abs() / n_exact.max(1.0));
    }
    let t = start.elapsed();
    Outcome {
        pass: worst <= CLOSED_FORM_RTOL && t < CLOSED_FORM_BUDGET,
        detail: format!("max relative error {worst:.2e} (tol {CLOSED_FORM_RTOL:.0e}), {:.2}s of {:?}", t.as_secs_f64(), CLOSED_FORM_BUDGET),
    }
}

fn multiplicity() -> Outcome {
    let start = Instant::now();
    let r = run_multiplicity_check(2024, 20, 2, 5, 1e-10).unwrap();
    let t = start.elapsed();
    let mismatches = r.entries.iter().filter(|e| !e.pass).count();
    let trials_covered = (0..20)
        .filter(|&t| r.entries.iter().filter(|e| e.trial == t).map(|e| e.analytic.unwrap_or(0)).sum::<usize>() >= 5)
        .count();
    Outcome {
        pass: mismatches == 0 && trials_covered == 20 && t < MULTIPLICITY_BUDGET,
        detail: format!("{mismatches} mismatches, {trials_covered}/20 trials with 5 eigenvalues checked, {:.1}s", t.as_secs_f64()),
    }
}

fn rellich() -> Outcome {
    let kappas: Vec<f64> = (3..=12).map(|k| 0.5f64.powi(k)).collect();
    let r = run_rellich(&kappas, 2, &ScanOptions::default()).unwrap();
    let l1: Vec<f64> = r.series.cells.iter().map(|c| c[0].value.unwrap_or(f64::NAN)).collect();
    let l2: Vec<f64> = r.series.cells.iter().map(|c| c[1].value.unwrap_or(f64::NAN)).collect();
    let decreasing = l1.windows(2).all(|w| w[1] < w[0]);
    let last = *l1.last().unwrap();
    let kappa = *kappas.last().unwrap();
    let leading = (last * kappa * kappa + 1.0).abs();
    let err: Vec<f64> = l2[l2.len() - 4..].iter().map(|v| (v - PI * PI).abs()).collect();
    let approach = err.windows(2).all(|w| w[1] <= w[0]);
    Outcome {
        pass: decreasing && last < RELLICH_FLOOR && leading <= RELLICH_LEADING_RTOL && approach,
        detail: format!(
            "λ₁ decreasing {decreasing}, λ₁(2^-12) = {last:.6e} (< {RELLICH_FLOOR:e}, |κ²λ₁+1| = {leading:.3e}), |λ₂ − π²| tail {err:?}"
        ),
    }
}

fn jump_law() -> Outcome {
    let start = Instant::now();
    let s = default_s_values();
    let opts = ScanOptions { conv_rtol: JUMP_CONV_TOL, ..ScanOptions::default() };
    let mut failures = Vec::new();
    let mut scans = 0;
    let mut worst_abs = 0.0f64;
    let mut worst_rel = 0.0f64;
    for (field, k) in [(unit(), vec![0, 1]), (unit_d2(), vec![0, 1, 2, 3])] {
        for (target, source) in full_chart_partition_pairs(k.len()) {
            let jumps = source.n_plus - target.n_plus;
            let m = jumps + 3;
            let r = run_jump_scan(&field, &k, target, source, &s, m, &opts).unwrap();
            scans += 1;
            let last = r.series.cells.last().unwrap();
            for n in jumps..m {
                if let (Some(v), Some(&t)) = (last[n].finite(), r.target_spectrum.get(n - jumps)) {
                    worst_abs = worst_abs.max((v - t).abs());
                    worst_rel = worst_rel.max((v - t).abs() / t.abs().max(1.0));
                }
            }
            for a in r.assertions.iter().filter(|a| !a.pass) {
                failures.push(format!("d={} {target}<-{source} {}: {}", field.dim(), a.name, a.detail));
            }
        }
    }
    let t = start.elapsed();
    Outcome {
        pass: failures.is_empty() && t < JUMP_BUDGET,
        detail: format!(
            "{scans} scans, {:.1}s; convergent branches at s = 2^-12 within {worst_rel:.3e} relative to max(1,|λ|) (absolute {worst_abs:.3e}); failures {failures:?}",
            t.as_secs_f64()
        ),
    }
}

fn layer_continuity() -> Outcome {
    let opts = ScanOptions::default();
    let rs = |rows: &[Vec<f64>]| CMatrix::from_real_rows(rows).unwrap();
    let mut rng = trial_rng(55, 0);
    let d2 = random_field(&mut rng, 2, 2, 3.0);
    let s1 = random_hermitian(&mut rng, 4, 1.0, false);
    let s2 = random_hermitian(&mut rng, 4, 1.0, false);
    let paths: Vec<(&str, CoefficientField, BoundaryCondition, BoundaryCondition, Option<Vec<usize>>)> = vec![
        (
            "neumann chart 0 to I",
            unit(),
            chart_compose(&[], &CMatrix::zeros(2, 2)).unwrap(),
            chart_compose(&[], &CMatrix::identity(2)).unwrap(),
            Some(vec![]),
        ),
        (
            "indefinite (0,1,1)",
            unit(),
            chart_compose(&[0, 1], &CMatrix::from_real_diagonal(&[1.0, -1.0])).unwrap(),
            chart_compose(&[0, 1], &CMatrix::from_real_diagonal(&[2.0, -3.0])).unwrap(),
            None,
        ),
        (
            "definite (0,2,0) coupled",
            unit(),
            chart_compose(&[0, 1], &rs(&[vec![2.0, 1.0], vec![1.0, 3.0]])).unwrap(),
            chart_compose(&[0, 1], &rs(&[vec![1.0, 0.0], vec![0.0, 4.0]])).unwrap(),
            Some(vec![0, 1]),
        ),
        (
            "K={1} singular S_K",
            unit(),
            chart_compose(&[0], &rs(&[vec![0.0, 0.5], vec![0.5, 1.0]])).unwrap(),
            chart_compose(&[0], &rs(&[vec![0.0, -1.0], vec![-1.0, 2.0]])).unwrap(),
            Some(vec![0]),
        ),
        ("d=2 random chart K=∅", d2, chart_compose(&[], &s1).unwrap(), chart_compose(&[], &s2).unwrap(), Some(vec![])),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (name, field, bc1, bc2, chart) in &paths {
        match run_layer_continuity(field, bc1, bc2, chart.as_deref(), 64, 1, &opts) {
            Ok(r) => {
                let ratio = r.fine_jump / r.coarse_jump;
                let ok = r.assertions.iter().all(|a| a.pass) && ratio < LAYER_RATIO;
                pass &= ok;
                details.push(format!("{name}: {:.3e}/{:.3e} ratio {ratio:.3}", r.fine_jump, r.coarse_jump));
            }
            Err(e) => {
                pass = false;
                details.push(format!("{name}: {e}"));
            }
        }
    }
    Outcome { pass, detail: details.join("; ") }
}

fn derivative() -> Outcome {
    let hs = [0.02, 0.01, 0.005, 0.0025];
    let mut pass = true;
    let mut done = 0;
    let mut skipped = 0;
    let mut worst_order = f64::INFINITY;
    let mut worst_limit = 0.0f64;
    let mut trial = 0;
    while done < 10 && trial < 40 {
        let mut rng = trial_rng(808, trial);
        trial += 1;
        let d = 1 + rng.gen_range(0..2);
        let field = random_field(&mut rng, d, 2, 3.0);
        let chart = random_chart(&mut rng, d, 1.0);
        let h = random_hermitian(&mut rng, 2 * d, 1.0, false);
        match run_derivative_check(&field, &chart, &h, &hs, 0) {
            Ok(r) => {
                done += 1;
                pass &= r.passed();
                for p in r.orders.iter().flatten() {
                    worst_order = worst_order.min(*p);
                }
                worst_limit = worst_limit.max((r.extrapolated - r.predicted).abs() / (1.0 + r.predicted.abs()));
            }
            Err(ExperimentError::NotSimple { .. }) | Err(ExperimentError::BranchTrackingAmbiguous { .. }) => skipped += 1,
            Err(e) => {
                pass = false;
                println!("  derivative trial {}: {e}", trial - 1);
            }
        }
    }
    let neumann = ChartRepr::new(vec![], CMatrix::zeros(2, 2)).unwrap();
    let r = run_derivative_check(&unit(), &neumann, &CMatrix::identity(2), &hs, 0).unwrap();
    let neumann_ok = r.passed() && (r.extrapolated - 2.0).abs() <= 1e-6 && (r.predicted - 2.0).abs() <= 1e-6;
    pass &= done == 10 && neumann_ok && worst_limit <= DERIVATIVE_LIMIT_RTOL;
    if worst_order.is_finite() {
        pass &= worst_order >= DERIVATIVE_ORDER;
    }
    Outcome {
        pass,
        detail: format!(
            "{done} configurations ({skipped} non-simple skipped), min order {worst_order:.3}, max scaled limit error {worst_limit:.2e}; Neumann u*Hu = {:.9}, extrapolated {:.9}",
            r.predicted, r.extrapolated
        ),
    }
}

fn monotonicity() -> Outcome {
    let steps = [0.1, 0.2, 0.4, 0.8, 1.6];
    let mut pass = true;
    let mut worst = f64::INFINITY;
    let (mut done, mut redrawn, mut trial) = (0, 0, 0);
    while done < 10 && trial < 100 {
        let mut rng = trial_rng(909, trial);
        let d = 1 + trial % 2;
        trial += 1;
        let field = random_field(&mut rng, d, 2, 3.0);
        let chart = random_chart(&mut rng, d, 1.0);
        let rank = 1 + rng.gen_range(0..2 * d);
        let h = random_psd(&mut rng, 2 * d, rank);
        match run_monotonicity_check(&field, &chart, &h, &steps, 0) {
            Ok(r) => {
                done += 1;
                pass &= r.passed();
                let v: Vec<f64> = r.series.cells.iter().filter_map(|c| c[0].value).collect();
                for w in v.windows(2) {
                    worst = worst.min(w[1] - w[0]);
                }
            }
            // Monotonicity only holds inside one stratum.
            Err(ExperimentError::StrataMismatch(..)) => redrawn += 1,
            Err(e) => {
                pass = false;
                println!("  monotonicity trial {}: {e}", trial - 1);
            }
        }
    }
    pass &= done == 10 && worst >= MONOTONE_SLACK;
    Outcome {
        pass,
        detail: format!("{done} directions ({redrawn} leaving the stratum redrawn), smallest increment {worst:.3e} (slack {MONOTONE_SLACK:e})"),
    }
}

fn round_trip() -> Outcome {
    let mut failures = 0;
    let mut layer_failures = 0;
    for t in 0..100 {
        let mut rng = trial_rng(1111, t);
        let d = 1 + rng.gen_range(0..3);
        let n = 2 * d;
        let k: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        // Rank-deficient S_K in part of the trials.
        let rank = rng.gen_range(0..=n);
        let g = random_hermitian(&mut rng, n, 1.0, false);
        let signs: Vec<f64> = (0..n).map(|i| if i < rank { if rng.gen_bool(0.5) { 1.0 } else { -1.0 } } else { 0.0 }).collect();
        let s = if rank == n { g } else { g.matmul(&CMatrix::from_real_diagonal(&signs)).unwrap().matmul(&g.adjoint()).unwrap() };
        let bc = chart_compose(&k, &s).unwrap();
        let back = chart_decompose(&bc).compose();
        let stacked = bc.block().vstack(&back.block()).unwrap();
        if rank_tol(&stacked, ROUND_TRIP_RANK_RTOL) != n {
            failures += 1;
        }
        let layer = layer_index(&bc);
        let in_k = stratum_label_in(&bc, &k, None).unwrap().inertia.n_zero;
        let decomposed = stratum_label(&bc, None).inertia.n_zero;
        if layer != in_k || layer != decomposed {
            layer_failures += 1;
        }
    }
    Outcome {
        pass: failures == 0 && layer_failures == 0,
        detail: format!("100 charts: {failures} row-space failures, {layer_failures} layer/n_zero mismatches"),
    }
}

fn decoupling() -> Outcome {
    let c1 = ScalarCoefficients::new(1.0, 0.0, 1.0);
    let c2 = ScalarCoefficients::new(2.0, 3.0, 1.5);
    let coupled = decoupled_field(vec![0.0, 1.0], &[vec![c1], vec![c2]]).unwrap();
    let f1 = CoefficientField::scalar(0.0, 1.0, 1.0, 0.0, 1.0).unwrap();
    let f2 = CoefficientField::scalar(0.0, 1.0, 2.0, 3.0, 1.5).unwrap();
    // Diagonal chart; indices {0, 2} belong to component 1 and {1, 3} to component 2.
    let k = [0usize, 3];
    let s = [0.7, -0.4, 1.3, 0.25];
    let bc = chart_compose(&k, &CMatrix::from_real_diagonal(&s)).unwrap();
    let bc1 = chart_compose(&[0], &CMatrix::from_real_diagonal(&[s[0], s[2]])).unwrap();
    let bc2 = chart_compose(&[1], &CMatrix::from_real_diagonal(&[s[1], s[3]])).unwrap();
    let mut worst = 0.0f64;
    for bcs in [(BoundaryCondition::dirichlet(2), BoundaryCondition::dirichlet(1), BoundaryCondition::dirichlet(1)), (bc, bc1, bc2)] {
        for i in 0..50 {
            let lambda = Complex64::new(-50.0 + 250.0 * i as f64 / 49.0, 0.0);
            let g = gamma(&coupled, &bcs.0, lambda).unwrap();
            let p = gamma(&f1, &bcs.1, lambda).unwrap() * gamma(&f2, &bcs.2, lambda).unwrap();
            worst = worst.max((g - p).norm() / p.norm().max(f64::MIN_POSITIVE));
        }
    }
    Outcome { pass: worst <= DECOUPLING_RTOL, detail: format!("max relative error {worst:.2e} over 2 x 50 points (tol {DECOUPLING_RTOL:.0e})") }
}

#[test]
fn acceptance() {
    type Criterion = (usize, &'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        (1, "closed-form spectra", closed_form),
        (2, "multiplicity equality", multiplicity),
        (3, "rellich jump", rellich),
        (4, "jump-count law", jump_law),
        (5, "layer continuity", layer_continuity),
        (6, "derivative formula", derivative),
        (7, "monotonicity", monotonicity),
        (8, "chart round trip", round_trip),
        (9, "decoupling identity", decoupling),
    ];
    let mut failed = Vec::new();
    for (id, name, run) in criteria {
        let start = Instant::now();
        if !report(id, name, start, run()) {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
