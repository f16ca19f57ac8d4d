//! Seeded random problem generators.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bc::ChartRepr;
use crate::kernel::CMatrix;
use crate::model::CoefficientField;

/// Deterministic generator for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn random_spd<R: Rng>(rng: &mut R, d: usize, floor: f64, spread: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    DMatrix::identity(d, d) * floor + (&g * g.transpose()) * (spread / d as f64)
}

/// Piecewise-constant field on `[0, 1]` with `pieces` pieces, `P, W ≥ 1/2` and `|Q| ≤ q_scale`.
pub fn random_field<R: Rng>(rng: &mut R, d: usize, pieces: usize, q_scale: f64) -> CoefficientField {
    let pieces = pieces.max(1);
    let mut cuts: Vec<f64> = (0..pieces - 1).map(|_| rng.gen_range(0.15..0.85)).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 0.05);
    let mut breakpoints = vec![0.0];
    breakpoints.extend(cuts);
    breakpoints.push(1.0);
    let coeffs = (0..breakpoints.len() - 1)
        .map(|_| {
            let p = random_spd(rng, d, 0.5, 1.0);
            let w = random_spd(rng, d, 0.5, 1.0);
            let q = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-q_scale..q_scale));
            let q = (&q + q.transpose()) * 0.5;
            (p, q, w)
        })
        .collect();
    CoefficientField::new(breakpoints, coeffs).expect("generated coefficients satisfy the hypotheses")
}

/// Hermitian matrix with entries of modulus up to `scale`; real when `real` is set.
pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize, scale: f64, real: bool) -> CMatrix {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(rng.gen_range(-scale..scale), 0.0);
        for j in 0..i {
            let im = if real { 0.0 } else { rng.gen_range(-scale..scale) };
            let z = Complex64::new(rng.gen_range(-scale..scale), im);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    CMatrix::from_nalgebra(m).expect("finite entries")
}

/// Positive semidefinite `G G*` with `G` of size `n × rank`.
pub fn random_psd<R: Rng>(rng: &mut R, n: usize, rank: usize) -> CMatrix {
    let g = DMatrix::from_fn(n, rank.max(1), |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let m = &g * g.adjoint();
    CMatrix::from_nalgebra(m).expect("finite entries").hermitian_part().expect("square")
}

/// Each of `0..n` independently with probability one half.
pub fn random_index_set<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).filter(|_| rng.gen_bool(0.5)).collect()
}

/// Random chart `(K, S)` of dimension `d`.
pub fn random_chart<R: Rng>(rng: &mut R, d: usize, scale: f64) -> ChartRepr {
    let k = random_index_set(rng, 2 * d);
    let s = random_hermitian(rng, 2 * d, scale, false);
    ChartRepr::new(k, s).expect("valid chart")
}
