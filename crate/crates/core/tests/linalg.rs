use maslov_core::linalg::*;
use rand::SeedableRng;

#[test]
fn expm_of_rotation_generator() {
    let j = j_matrix(1);
    let t: f64 = 0.7;
    let e = expm(&(&j * c(t)));
    let want = eye(2) * c(t.cos()) + &j * c(t.sin());
    assert!(frob(&(e - want)) < 1e-14);
}

#[test]
fn expm_large_norm() {
    let j = j_matrix(2);
    let e = expm(&(&j * c(40.0)));
    let want = eye(4) * c(40f64.cos()) + &j * c(40f64.sin());
    assert!(frob(&(e - want)) < 1e-11);
}

#[test]
fn null_space_dims() {
    let m = real_mat(1, 3, &[1.0, 1.0, 0.0]);
    let k = null_space(&m, 1e-12);
    assert_eq!(k.ncols(), 2);
    assert!(frob(&(&m * &k)) < 1e-13);
}

#[test]
fn null_space_wide_complex() {
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let m = random_complex(&mut r, 5, 40);
    let k = null_space(&m, 1e-12);
    assert_eq!(k.ncols(), 35);
    assert!(frob(&(&m * &k)) < 1e-12);
    assert!(frob(&(k.adjoint() * &k - eye(35))) < 1e-12);
    let mut d = m.clone();
    let row = d.row(0).clone_owned();
    d.set_row(1, &row);
    assert_eq!(null_space(&d, 1e-12).ncols(), 36);
}

#[test]
fn pencil_reduction_matches_generalized_eigs() {
    let k = diag_real(&[2.0, -3.0]);
    let m = diag_real(&[4.0, 1.0]);
    let a = pencil_reduce(&k, &m).unwrap();
    let ev = herm_eigvals(&a);
    assert!((ev[0] + 3.0).abs() < 1e-14 && (ev[1] - 0.5).abs() < 1e-14);
}
