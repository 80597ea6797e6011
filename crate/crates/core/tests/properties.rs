use maslov_core::linalg::*;
use maslov_core::spectral::{spectral_flow, HermitianPath, SfOptions};
use maslov_core::suites::rng;
use maslov_core::symplectic::*;
use proptest::prelude::*;

fn sign_path(shifts: Vec<(f64, bool)>) -> HermitianPath {
    HermitianPath::new(0.0, 1.0, move |s| {
        diag_real(&shifts.iter().map(|&(c, up)| if up { s - c } else { c - s }).collect::<Vec<_>>())
    })
}

fn shifts() -> impl Strategy<Value = Vec<(f64, bool)>> {
    prop::collection::vec(
        (prop_oneof![-1.0..-0.05, 0.05..0.95, 1.05..2.0], any::<bool>()),
        1..7,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symplectic_group_closed(seed in any::<u64>(), n in 1usize..4) {
        let mut r = rng(seed);
        let p = random_symplectic(&mut r, n, 0.5, 3);
        let q = random_symplectic(&mut r, n, 0.5, 3);
        prop_assert!(is_symplectic(&p, 1e-9).unwrap());
        prop_assert!(is_symplectic(&(&p * &q), 1e-8).unwrap());
        prop_assert!(is_symplectic(&inverse(&p).unwrap(), 1e-8).unwrap());
    }

    #[test]
    fn graph_of_symplectic_is_lagrangian(seed in any::<u64>(), n in 1usize..4) {
        let mut r = rng(seed);
        let s = random_symplectic(&mut r, n, 0.5, 3);
        let g = doubled_lagrangian(&graph_frame(&s), 1e-8).unwrap();
        prop_assert!(g.isotropy_residual < 1e-8);
        prop_assert_eq!(g.ambient(), 4 * n);
    }

    #[test]
    fn anti_symplectic_squares_to_symplectic(seed in any::<u64>(), n in 1usize..4) {
        let mut r = rng(seed);
        let m = random_anti_symplectic(&mut r, n, 0.5);
        prop_assert!(is_anti_symplectic(&m, 1e-8).unwrap());
        prop_assert!(is_symplectic(&(&m * &m), 1e-7).unwrap());
    }

    #[test]
    fn intersection_dimension_is_symplectic_invariant(seed in any::<u64>(), n in 1usize..4, k in 0usize..3) {
        let mut r = rng(seed);
        let k = k.min(n);
        // L2 shares k directions with L1 = Gr(I) through a symmetric perturbation of rank n - k
        let mut d = vec![0.0; n];
        for (i, x) in d.iter_mut().enumerate().skip(k) {
            *x = 1.0 + i as f64;
        }
        let l1 = lagrangian_from_frame(&vstack(&eye(n), &eye(n)), 1e-10).unwrap();
        let l2 = lagrangian_from_frame(&vstack(&eye(n), &(eye(n) + diag_real(&d))), 1e-10).unwrap();
        prop_assert_eq!(intersection_dimension(&l1, &l2, 1e-8).unwrap(), k);
        let p = random_symplectic(&mut r, n, 0.4, 2);
        let pl1 = lagrangian_from_frame(&(&p * &l1.frame), 1e-8).unwrap();
        let pl2 = lagrangian_from_frame(&(&p * &l2.frame), 1e-8).unwrap();
        prop_assert_eq!(intersection_dimension(&pl1, &pl2, 1e-7).unwrap(), k);
    }

    #[test]
    fn gap_is_a_metric(seed in any::<u64>(), d in 2usize..7) {
        let mut r = rng(seed);
        let k = 1 + (seed as usize) % (d - 1);
        let u = Subspace::from_basis(&random_complex(&mut r, d, k), 1e-12);
        let v = Subspace::from_basis(&random_complex(&mut r, d, k), 1e-12);
        let w = Subspace::from_basis(&random_complex(&mut r, d, k), 1e-12);
        let (uv, vu) = (gap_distance(&u, &v), gap_distance(&v, &u));
        prop_assert!((uv - vu).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&uv));
        prop_assert!(gap_distance(&u, &u) < 1e-12);
        prop_assert!(uv <= gap_distance(&u, &w) + gap_distance(&w, &v) + 1e-12);
    }

    #[test]
    fn sf_counts_signed_zero_crossings(sh in shifts()) {
        let expected: i64 = sh
            .iter()
            .filter(|(c, _)| *c > 0.0 && *c < 1.0)
            .map(|&(_, up)| if up { 1 } else { -1 })
            .sum();
        let rep = spectral_flow(&sign_path(sh), &SfOptions::default()).unwrap();
        prop_assert_eq!(rep.sf, expected);
    }

    #[test]
    fn sf_reverses_sign(sh in shifts()) {
        let forward = sign_path(sh.clone());
        let back = HermitianPath::new(0.0, 1.0, move |s| forward.matrix(1.0 - s).unwrap());
        let f = spectral_flow(&sign_path(sh), &SfOptions::default()).unwrap().sf;
        let b = spectral_flow(&back, &SfOptions::default()).unwrap().sf;
        prop_assert_eq!(f, -b);
    }

    #[test]
    fn sf_invariant_under_constant_congruence(sh in shifts(), seed in any::<u64>()) {
        let d = sh.len();
        let mut r = rng(seed);
        let m = eye(d) + random_complex(&mut r, d, d) * c(0.3);
        let base = sign_path(sh);
        let f = spectral_flow(&base, &SfOptions::default()).unwrap().sf;
        let mm = m.clone();
        let moved = HermitianPath::new(0.0, 1.0, move |s| hermitian_part(&(mm.adjoint() * base.matrix(s).unwrap() * &mm)));
        prop_assert_eq!(spectral_flow(&moved, &SfOptions::default()).unwrap().sf, f);
    }
}
