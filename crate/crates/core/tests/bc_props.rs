use proptest::prelude::*;
use rand::Rng;
use slp_core::bc::{
    approach_path, canonical_singular, chart_compose, chart_decompose, connect_within_stratum, layer_index, stratum_label,
    stratum_label_in, BoundaryCondition,
};
use slp_core::experiments::random::{random_chart, random_hermitian, random_index_set, random_psd, trial_rng};
use slp_core::kernel::{determinant, rank_tol, CMatrix, Inertia};
use slp_core::Complex64;

fn random_gl<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    loop {
        let e = (0..n * n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let t = CMatrix::from_row_major(n, n, e).unwrap();
        if determinant(&t).unwrap().norm() > 0.05 {
            return t;
        }
    }
}

/// Chart condition whose `S_K` has a prescribed number of zero eigenvalues.
fn singular_chart<R: Rng>(rng: &mut R, d: usize) -> BoundaryCondition {
    let n = 2 * d;
    let k = random_index_set(rng, n);
    let mut s = random_hermitian(rng, n, 1.0, false);
    if !k.is_empty() {
        let rank = rng.gen_range(0..=k.len());
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let sk = random_psd(rng, k.len(), rank).scale_real(sign);
        let sk = if rank == 0 { CMatrix::zeros(k.len(), k.len()) } else { sk };
        let mut rows = s.to_rows();
        for (i, &ki) in k.iter().enumerate() {
            for (j, &kj) in k.iter().enumerate() {
                rows[ki][kj] = sk.get(i, j);
            }
        }
        s = CMatrix::from_rows(&rows).unwrap();
    }
    chart_compose(&k, &s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn chart_round_trip_keeps_row_space(seed in any::<u64>(), d in 1usize..=3) {
        let mut rng = trial_rng(seed, 0);
        let chart = random_chart(&mut rng, d, 2.0);
        let bc = chart.compose();
        let again = chart_decompose(&bc).compose();
        let stacked = bc.normalized().block().vstack(&again.normalized().block()).unwrap();
        prop_assert_eq!(rank_tol(&stacked, 1e-9), 2 * d);
        prop_assert!(bc.same_as(&again));
    }

    #[test]
    fn layer_matches_chart_zero_count(seed in any::<u64>(), d in 1usize..=3) {
        let mut rng = trial_rng(seed, 1);
        let bc = singular_chart(&mut rng, d);
        let label = stratum_label(&bc, None);
        prop_assert_eq!(label.inertia.dim(), label.k.len());
        prop_assert_eq!(layer_index(&bc), label.inertia.n_zero);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn classification_is_gl_invariant(seed in any::<u64>(), d in 1usize..=2) {
        let mut rng = trial_rng(seed, 2);
        let bc = singular_chart(&mut rng, d);
        let label = stratum_label(&bc, None);
        let layer = layer_index(&bc);
        for _ in 0..20 {
            let t = random_gl(&mut rng, 2 * d);
            let moved = bc.transformed(&t).unwrap();
            prop_assert!(moved.same_as(&bc));
            prop_assert_eq!(layer_index(&moved), layer);
            prop_assert_eq!(&stratum_label(&moved, None), &label);
        }
    }
}

fn partition_pair() -> impl Strategy<Value = (usize, Vec<usize>, Inertia, Inertia)> {
    (1usize..=2, any::<u64>()).prop_flat_map(|(d, seed)| {
        let mut rng = trial_rng(seed, 3);
        let mut k: Vec<usize> = random_index_set(&mut rng, 2 * d);
        if k.is_empty() {
            k.push(rng.gen_range(0..2 * d));
        }
        let m = k.len();
        (Just(d), Just(k), 1..=m).prop_flat_map(move |(d, k, zeros)| {
            (Just(d), Just(k), Just(zeros), 0..=m - zeros, 0..=zeros).prop_flat_map(move |(d, k, zeros, plus, kept)| {
                let minus = m - zeros - plus;
                let moved = zeros - kept.min(zeros - 1);
                (Just(d), Just(k), Just(Inertia::new(zeros, plus, minus)), Just(zeros - moved), 0..=moved).prop_map(
                    move |(d, k, target, src_zero, up)| {
                        let source = Inertia::new(src_zero, target.n_plus + up, target.n_minus + (zeros - src_zero - up));
                        (d, k, target, source)
                    },
                )
            })
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn approach_path_converges_within_one_stratum((d, k, target, source) in partition_pair()) {
        let limit = canonical_singular(&k, target, d).unwrap();
        let mut last = f64::INFINITY;
        for j in 0..=20 {
            let s = 0.5f64.powi(j);
            let bc = approach_path(&k, target, source, s, d).unwrap();
            let label = stratum_label_in(&bc, &k, None).unwrap();
            prop_assert_eq!(label.inertia, source);
            let gap = bc.a().sub(limit.a()).unwrap().max_abs().max(bc.b().sub(limit.b()).unwrap().max_abs());
            prop_assert!(gap <= s + 1e-15 && gap <= last, "gap {} at s = {}", gap, s);
            last = gap;
        }
        prop_assert!(last <= 1e-6);
    }

    #[test]
    fn stratum_paths_keep_their_label(seed in any::<u64>(), d in 1usize..=2) {
        let mut rng = trial_rng(seed, 4);
        let bc1 = singular_chart(&mut rng, d);
        let label = stratum_label(&bc1, None);
        let t = random_gl(&mut rng, 2 * d);
        // A second member of the same stratum: congruent chart coordinates.
        let chart = chart_decompose(&bc1);
        let r = random_gl(&mut rng, chart.k.len().max(1));
        let sk = chart.s_k();
        let moved = if chart.k.is_empty() { sk } else { r.adjoint().matmul(&sk).unwrap().matmul(&r).unwrap().hermitian_part().unwrap() };
        let mut rows = random_hermitian(&mut rng, 2 * d, 1.0, false).to_rows();
        for (i, &ki) in chart.k.iter().enumerate() {
            for (j, &kj) in chart.k.iter().enumerate() {
                rows[ki][kj] = moved.get(i, j);
            }
        }
        let bc2 = chart_compose(&chart.k, &CMatrix::from_rows(&rows).unwrap()).unwrap().transformed(&t).unwrap();
        prop_assume!(stratum_label(&bc2, None) == label);
        for i in 0..=10 {
            let tau = i as f64 / 10.0;
            let p = connect_within_stratum(&bc1, &bc2, tau, None).unwrap();
            prop_assert_eq!(&stratum_label(&p, None), &label, "tau = {}", tau);
        }
    }
}
