use maslov_core::symmetry::*;
use maslov_core::spectral::HermitianPath;
use maslov_core::symplectic::generalized_eigenspaces;
use maslov_core::linalg::*;
use maslov_core::spectral::SfOptions;
use rand::SeedableRng;

#[test]
fn half_kernel_case() {
    let g = diag_real(&[2.0, 0.5]);
    let path = HermitianPath::new(0.0, 1.0, |s| real_mat(2, 2, &[0.0, s, s, 0.0]));
    let r = decompose_spectral_flow(&path, &g, 1e-8, &SfOptions::default()).unwrap();
    assert!(r.blocks.is_empty());
    assert_eq!(r.hat_term, -1);
    assert_eq!(r.direct, -1);
    assert_eq!(r.residual, 0);
}

#[test]
fn unit_circle_blocks() {
    let g = diag_complex(&[ci(0.0, 1.0), ci(0.0, -1.0)]);
    let path = HermitianPath::new(0.0, 1.0, |s| diag_real(&[s - 0.5, 0.5 - s]));
    let r = decompose_spectral_flow(&path, &g, 1e-8, &SfOptions::default()).unwrap();
    let mut sfs: Vec<i64> = r.blocks.iter().map(|b| b.sf).collect();
    sfs.sort();
    assert_eq!(sfs, vec![-1, 1]);
    assert_eq!((r.hat_term, r.total, r.direct), (0, 0, 0));
}

#[test]
fn a_orthogonality_examples() {
    let g = diag_real(&[2.0, 0.5]);
    let dec = generalized_eigenspaces(&g, 1e-8).unwrap();
    let rep = a_orthogonality_check(&real_mat(2, 2, &[0.0, 1.0, 1.0, 0.0]), &dec, 1e-12);
    assert!(rep.ok);
    assert_eq!(rep.pairs_checked, 2);
    let dec = generalized_eigenspaces(&diag_complex(&[ci(0.0, 1.0), ci(0.0, -1.0)]), 1e-8).unwrap();
    assert!(a_orthogonality_check(&diag_real(&[1.0, -1.0]), &dec, 1e-12).ok);
}

#[test]
fn compression_examples() {
    let path = HermitianPath::new(0.0, 1.0, |s| real_mat(2, 2, &[0.0, s, s, 0.0]));
    let u = real_mat(2, 1, &[1.0, 1.0]) * c(0.5f64.sqrt());
    let p = compress(&path, &u).unwrap();
    assert!((p.matrix(0.7).unwrap()[(0, 0)].re - 0.7).abs() < 1e-14);
    assert!(compress(&path, &real_mat(2, 1, &[1.0, 1.0])).is_err());
}

#[test]
fn random_families_decompose() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for trial in 0..6 {
        let (g, path) = random_compatible_family(
            &mut rng,
            &[(cis(0.4), 2), (c(-1.0), 1)],
            &[(c(2.0), 1), (ci(0.3, 1.5), 1)],
            trial % 2 == 0,
            0.3,
        );
        let r = decompose_spectral_flow(&path, &g, 1e-7, &SfOptions::default()).unwrap();
        assert_eq!(r.residual, 0, "{r:?}");
        assert_eq!((r.hat_kernel_b as i64 - r.hat_kernel_a as i64) % 2, 0);
    }
}
