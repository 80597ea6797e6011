use maslov_core::symplectic::*;
use maslov_core::linalg::*;
use maslov_core::error::*;

#[test]
fn symplectic_examples() {
    assert!(is_symplectic(&eye(2), 1e-12).unwrap());
    assert!(is_symplectic(&j_matrix(1), 1e-12).unwrap());
    assert!(!is_symplectic(&diag_real(&[1.0, -1.0]), 1e-12).unwrap());
    assert!(is_symplectic(&eye(3), 1e-12).is_err());
}

#[test]
fn anti_symplectic_examples() {
    assert!(is_anti_symplectic(&diag_real(&[1.0, -1.0]), 1e-12).unwrap());
    assert!(is_anti_symplectic(&diag_real(&[2.0, -0.5]), 1e-12).unwrap());
    assert!(!is_anti_symplectic(&eye(2), 1e-12).unwrap());
}

#[test]
fn lagrangian_examples() {
    let h = vstack(&eye(2), &CMat::zeros(2, 2));
    assert!(lagrangian_from_frame(&h, 1e-12).is_ok());
    assert!(lagrangian_from_frame(&graph_frame(&eye(2)), 1e-12).is_ok());
    assert!(matches!(lagrangian_from_frame(&eye(2), 1e-12), Err(Error::Dimension(_))));
    let bad = real_mat(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    assert!(matches!(
        lagrangian_from_frame(&bad, 1e-12),
        Err(Error::NotLagrangian { .. })
    ));
    let rank_def = real_mat(4, 2, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    assert!(matches!(
        lagrangian_from_frame(&rank_def, 1e-12),
        Err(Error::DegenerateFrame { .. })
    ));
}

#[test]
fn intersection_examples() {
    let h = lagrangian_from_frame(&vstack(&eye(2), &CMat::zeros(2, 2)), 1e-12).unwrap();
    assert_eq!(intersection_dimension(&h, &h, 1e-9).unwrap(), 2);
    let e1 = lagrangian_from_frame(&real_mat(2, 1, &[1.0, 0.0]), 1e-12).unwrap();
    let e2 = lagrangian_from_frame(&real_mat(2, 1, &[0.0, 1.0]), 1e-12).unwrap();
    assert_eq!(intersection_dimension(&e1, &e2, 1e-9).unwrap(), 0);
    let th: f64 = 0.3;
    let l = lagrangian_from_frame(&real_mat(2, 1, &[th.cos(), th.sin()]), 1e-12).unwrap();
    assert_eq!(intersection_dimension(&e1, &l, 1e-9).unwrap(), 0);
}

#[test]
fn gap_examples() {
    let e1 = Subspace::from_basis(&real_mat(2, 1, &[1.0, 0.0]), 1e-12);
    let e2 = Subspace::from_basis(&real_mat(2, 1, &[0.0, 1.0]), 1e-12);
    let f = std::f64::consts::FRAC_PI_4;
    let d = Subspace::from_basis(&real_mat(2, 1, &[f.cos(), f.sin()]), 1e-12);
    assert_eq!(gap_distance(&e1, &e1), 0.0);
    assert!((gap_distance(&e1, &e2) - 1.0).abs() < 1e-14);
    assert!((gap_distance(&e1, &d) - 0.5f64.sqrt()).abs() < 1e-12);
    assert_eq!(gap_distance(&Subspace::zero(3), &Subspace::zero(3)), 0.0);
}

#[test]
fn gap_matches_sampled_sup() {
    // δ(U,V) = sup over unit u in U of dist(u, V), sampled densely
    let f = 0.45f64;
    let u = Subspace::from_basis(&real_mat(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]), 1e-12);
    let v = Subspace::from_basis(
        &real_mat(3, 2, &[1.0, 0.0, 0.0, f.cos(), 0.0, f.sin()]),
        1e-12,
    );
    let pv = v.projector();
    let mut sup: f64 = 0.0;
    for k in 0..2000 {
        let a = k as f64 * std::f64::consts::PI / 2000.0;
        let x = &u.basis * CVec::from_vec(vec![c(a.cos()), c(a.sin())]);
        let r = &x - &pv * &x;
        sup = sup.max(r.norm());
    }
    assert!((gap_distance(&u, &v) - sup).abs() < 1e-6);
}

#[test]
fn eigenspace_examples() {
    let dec = generalized_eigenspaces(&diag_real(&[2.0, 0.5]), 1e-8).unwrap();
    assert_eq!(dec.eigenvalues.len(), 2);
    let i2 = dec.index_of(c(2.0), 1e-9).unwrap();
    assert!((dec.spaces[i2][(0, 0)].norm() - 1.0).abs() < 1e-12);

    let jb = real_mat(2, 2, &[2.0, 1.0, 0.0, 2.0]);
    let dec = generalized_eigenspaces(&jb, 1e-8).unwrap();
    assert_eq!(dec.eigenvalues.len(), 1);
    assert_eq!(dec.spaces[0].ncols(), 2);

    let a = 2.0 * std::f64::consts::PI / 3.0;
    let rot = real_mat(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()]);
    let dec = generalized_eigenspaces(&rot, 1e-8).unwrap();
    assert_eq!(dec.eigenvalues.len(), 2);
    for (l, s) in dec.eigenvalues.iter().zip(&dec.spaces) {
        assert!((l.norm() - 1.0).abs() < 1e-12);
        assert!(frob(&(&rot * s - s * *l)) < 1e-12);
    }
    assert!(matches!(
        generalized_eigenspaces(&diag_real(&[1.0, 0.0]), 1e-8),
        Err(Error::Singular { .. })
    ));
}

#[test]
fn grouping_examples() {
    let g = diag_complex(&[ci(0.0, 1.0), ci(0.0, -1.0)]);
    let dec = group_spectral_pairs(generalized_eigenspaces(&g, 1e-8).unwrap(), 1e-8).unwrap();
    assert_eq!(dec.groups.len(), 2);
    assert!(dec.groups.iter().all(|g| g.on_circle));
    assert_eq!(dec.hat_f.ncols(), 0);

    let g = diag_real(&[2.0, 0.5]);
    let dec = group_spectral_pairs(generalized_eigenspaces(&g, 1e-8).unwrap(), 1e-8).unwrap();
    assert_eq!(dec.groups.len(), 1);
    assert_eq!(dec.hat_f.ncols(), 2);

    let g = diag_real(&[2.0, 0.5, -1.0, -1.0]);
    let dec = group_spectral_pairs(generalized_eigenspaces(&g, 1e-8).unwrap(), 1e-8).unwrap();
    assert_eq!(dec.groups.len(), 2);
    assert_eq!(dec.hat_f.ncols(), 2);
    let hp = &dec.hat_f * dec.hat_f.adjoint();
    assert!((hp[(0, 0)].re - 1.0).abs() < 1e-12 && (hp[(1, 1)].re - 1.0).abs() < 1e-12);
    let circle = dec.groups.iter().find(|g| g.on_circle).unwrap();
    assert_eq!(circle.basis.ncols(), 2);

    let g = diag_real(&[2.0, 1.0]);
    let r = group_spectral_pairs(generalized_eigenspaces(&g, 1e-8).unwrap(), 1e-8);
    assert!(matches!(r, Err(Error::Pairing { .. })));
}

#[test]
fn anti_symplectic_pairing_examples() {
    let r = anti_symplectic_spectrum_check(&diag_real(&[1.0, -1.0]), 1e-9).unwrap();
    assert!(r.multiplicities_match && r.j_orthogonal);
    let r = anti_symplectic_spectrum_check(&diag_real(&[2.0, -0.5]), 1e-9).unwrap();
    assert!(r.multiplicities_match);
    assert!(r
        .pairs
        .iter()
        .any(|p| (p.lambda.0 - 2.0).abs() < 1e-9 && (p.partner.0 + 0.5).abs() < 1e-9));
    let r = anti_symplectic_spectrum_check(&diag_real(&[1.0, 1.0, -1.0, -1.0]), 1e-9).unwrap();
    assert!(r.multiplicities_match);
    assert!(r.pairs.iter().all(|p| p.algebraic == (2, 2)));
}
