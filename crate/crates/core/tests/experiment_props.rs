use proptest::prelude::*;
use slp_core::bc::chart_compose;
use slp_core::experiments::random::{random_field, random_psd, trial_rng};
use slp_core::experiments::{run_layer_continuity, run_multiplicity_check, run_rellich, to_csv, Report, ScanOptions, Status};
use slp_core::kernel::CMatrix;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn same_seed_gives_identical_csv(seed in any::<u64>()) {
        let a = run_multiplicity_check(seed, 2, 2, 3, 1e-10).unwrap();
        let b = run_multiplicity_check(seed, 2, 2, 3, 1e-10).unwrap();
        prop_assert_eq!(to_csv(&a.series), to_csv(&b.series));
        let kappas = [1.0, 0.5, 0.25, 0.125];
        let r1 = run_rellich(&kappas, 2, &ScanOptions::default()).unwrap();
        let r2 = run_rellich(&kappas, 2, &ScanOptions::default()).unwrap();
        prop_assert_eq!(to_csv(&r1.series), to_csv(&r2.series));
    }

    #[test]
    fn constant_stratum_paths_never_diverge(seed in any::<u64>(), d in 1usize..=2) {
        let mut rng = trial_rng(seed, 0);
        let field = random_field(&mut rng, d, 2, 3.0);
        let n = 2 * d;
        let k: Vec<usize> = (0..d).collect();
        // Positive definite S_K on both ends, so every point of the segment shares the label.
        let s = |m: CMatrix| -> CMatrix {
            let mut full = CMatrix::zeros(n, n).to_rows();
            for i in 0..d {
                for j in 0..d {
                    full[i][j] = m.get(i, j);
                }
            }
            CMatrix::from_rows(&full).unwrap()
        };
        let spd = |m: CMatrix| m.add(&CMatrix::identity(d).scale_real(0.5)).unwrap();
        let bc1 = chart_compose(&k, &s(spd(random_psd(&mut rng, d, d)))).unwrap();
        let bc2 = chart_compose(&k, &s(spd(random_psd(&mut rng, d, d)))).unwrap();
        let report = run_layer_continuity(&field, &bc1, &bc2, Some(&k), 8, 2, &ScanOptions::default()).unwrap();
        for series in report.series() {
            for row in &series.cells {
                prop_assert!(row.iter().all(|c| c.status == Status::Ok), "{:?}", row);
            }
        }
    }
}
