use proptest::prelude::*;
use slp_core::kernel::{default_zero_tol, determinant, hermitian_inertia, matrix_exp, null_space, rank_tol, CMatrix, Inertia};
use slp_core::Complex64;

fn entries(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im)), n * n)
}

fn square(n: usize, e: Vec<Complex64>) -> CMatrix {
    CMatrix::from_row_major(n, n, e).unwrap()
}

/// `I + 0.3·E`, comfortably invertible for entries of modulus below √2.
fn near_identity(n: usize, e: Vec<Complex64>) -> CMatrix {
    CMatrix::identity(n).add(&square(n, e).scale_real(0.3 / n as f64)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inertia_survives_congruence(
        diag in prop::collection::vec(-2i32..=2, 4),
        g in entries(4),
        r in entries(4),
    ) {
        let d = CMatrix::from_real_diagonal(&diag.iter().map(|&x| x as f64).collect::<Vec<_>>());
        let g = near_identity(4, g);
        let m = g.adjoint().matmul(&d).unwrap().matmul(&g).unwrap().hermitian_part().unwrap();
        let expect = Inertia::new(
            diag.iter().filter(|&&x| x == 0).count(),
            diag.iter().filter(|&&x| x > 0).count(),
            diag.iter().filter(|&&x| x < 0).count(),
        );
        let got = hermitian_inertia(&m, default_zero_tol(&m)).unwrap();
        prop_assert_eq!(got, expect);
        prop_assert_eq!(got.dim(), 4);
        let r = near_identity(4, r);
        let c = r.adjoint().matmul(&m).unwrap().matmul(&r).unwrap().hermitian_part().unwrap();
        prop_assert_eq!(hermitian_inertia(&c, default_zero_tol(&c)).unwrap(), expect);
    }

    #[test]
    fn rank_plus_nullity_is_column_count(
        mask in prop::collection::vec(any::<bool>(), 5),
        g in entries(5),
        h in entries(5),
    ) {
        let keep: Vec<f64> = mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let m = near_identity(5, g)
            .matmul(&CMatrix::from_real_diagonal(&keep)).unwrap()
            .matmul(&near_identity(5, h)).unwrap();
        let rank = rank_tol(&m, 1e-9);
        prop_assert_eq!(rank, mask.iter().filter(|&&b| b).count());
        prop_assert_eq!(rank + null_space(&m, 1e-9).len(), 5);
    }

    #[test]
    fn determinant_is_multiplicative(a in entries(4), b in entries(4)) {
        let a = near_identity(4, a).scale_real(1.5);
        let b = near_identity(4, b);
        let lhs = determinant(&a.matmul(&b).unwrap()).unwrap();
        let rhs = determinant(&a).unwrap() * determinant(&b).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn exponential_inverts(e in entries(4), norm in 0.0..5.0f64) {
        let m = square(4, e);
        let f = m.frobenius_norm();
        prop_assume!(f > 0.0);
        let m = m.scale_real(norm / f);
        let prod = matrix_exp(&m).unwrap().matmul(&matrix_exp(&m.scale_real(-1.0)).unwrap()).unwrap();
        let err = prod.sub(&CMatrix::identity(4)).unwrap().max_abs();
        prop_assert!(err <= 1e-10, "residual {:e}", err);
    }
}
