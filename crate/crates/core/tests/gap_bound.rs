use maslov_core::linalg::*;
use maslov_core::suites::{gap_suite, gap_transform_bound, gap_transform_bound_conditioned};
use maslov_core::symplectic::{gap_distance, Subspace};

// Badly conditioned P = Q stretches two nearby lines apart by a factor of about ‖P‖‖P⁻¹‖.
#[test]
fn unconditioned_bound_fails_for_ill_conditioned_transform() {
    let p = diag_real(&[10.0, 0.1]);
    let m = Subspace::from_basis(&real_mat(2, 1, &[1e-3, 1.0]), 1e-14);
    let n = Subspace::from_basis(&real_mat(2, 1, &[0.0, 1.0]), 1e-14);
    let gap_mn = gap_distance(&m, &n);
    let lhs = gap_distance(
        &Subspace::from_basis(&(&p * &m.basis), 1e-14),
        &Subspace::from_basis(&(&p * &n.basis), 1e-14),
    );
    let naive = gap_transform_bound(gap_mn, &p, &p).unwrap();
    let safe = gap_transform_bound_conditioned(gap_mn, &p, &p).unwrap();
    assert!((lhs - 0.0995).abs() < 1e-3, "{lhs}");
    assert!(lhs > 9.0 * naive);
    assert!(lhs <= safe);
}

#[test]
fn random_instances_satisfy_both_bounds() {
    let o = gap_suite(2024, 200);
    assert!(o.ok(), "{:?}", o.failures);
}
