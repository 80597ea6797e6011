use maslov_core::flow::*;
use maslov_core::linalg::*;
use maslov_core::error::*;
use maslov_core::symplectic::{gap_distance, Subspace};
use std::f64::consts::PI;

#[test]
fn zero_field_is_identity() {
    let sys = HamiltonianSystem::on_interval(1, 0.0, 1.0, constant_fn(CMat::zeros(2, 2)));
    let f = fundamental_solution(&sys, 16).unwrap();
    assert!(f.mats.iter().all(|g| frob(&(g - eye(2))) < 1e-15));
}

#[test]
fn rotation_closed_form() {
    let sys = HamiltonianSystem::on_interval(1, 0.0, 2.0 * PI, constant_fn(eye(2)));
    let f = fundamental_solution(&sys, 1024).unwrap();
    assert!(frob(&(f.final_value() - eye(2))) <= 1e-8);
    assert!(f.max_symplectic_residual() <= 1e-10);
    let t: f64 = 1.234;
    let want = eye(2) * c(t.cos()) + j_matrix(1) * c(t.sin());
    assert!(frob(&(f.at(t) - want)) < 1e-12);
}

#[test]
fn nonsymmetric_b_rejected() {
    let sys = HamiltonianSystem::on_interval(
        1,
        0.0,
        1.0,
        constant_fn(real_mat(2, 2, &[0.0, 1.0, 0.0, 0.0])),
    );
    assert!(matches!(fundamental_solution(&sys, 4), Err(Error::Coefficient(_))));
}

#[test]
fn hyperbolicity_examples() {
    let (ok, gap) = hyperbolicity_check(&diag_real(&[-1.0, 1.0]), 1e-9).unwrap();
    assert!(ok && (gap - 1.0).abs() < 1e-12);
    let (ok, _) = hyperbolicity_check(&eye(2), 1e-9).unwrap();
    assert!(!ok);
    let (ok, gap) = hyperbolicity_check(&diag_real(&[-2.0, 2.0]), 1e-9).unwrap();
    assert!(ok && (gap - 2.0).abs() < 1e-12);
}

#[test]
fn constant_hyperbolic_frames() {
    let b = diag_real(&[-1.0, 1.0]);
    let sys = HamiltonianSystem::on_line(1, 5.0, constant_fn(b.clone()), b.clone(), b);
    let (vs, vu) = stable_unstable_frames(&sys, 5.0, 200).unwrap();
    let s = Subspace::from_basis(&real_mat(2, 1, &[1.0, 1.0]), 1e-12);
    let u = Subspace::from_basis(&real_mat(2, 1, &[1.0, -1.0]), 1e-12);
    for f in &vs.frames {
        assert!(gap_distance(&f.subspace(), &s) < 1e-10);
        assert!(f.isotropy_residual <= 1e-10);
    }
    for f in &vu.frames {
        assert!(gap_distance(&f.subspace(), &u) < 1e-10);
    }
}
