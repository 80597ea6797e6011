use maslov_core::iteration::*;
use maslov_core::linalg::*;
use maslov_core::error::*;
use maslov_core::maslov::MaslovOptions;
use maslov_core::spectral::SfOptions;
use maslov_core::spectral::SemGrid;
use std::sync::Arc;
use maslov_core::flow::constant_fn;
use std::f64::consts::PI;

#[test]
fn rotation_bott() {
    let o = MaslovOptions::default();
    for m in [1, 2, 3] {
        let pb = BottProblem {
            n: 1,
            tau: 2.0 * PI,
            b: constant_fn(eye(2)),
            p: eye(2),
            omega_turns: 0.0,
        };
        let r = bott_iteration_check(&pb, m, 64, &o).unwrap();
        assert_eq!(r.lhs, 2 * m as i64, "{r:?}");
        assert_eq!(r.residual, 0, "{r:?}");
    }
}

#[test]
fn brake_eigenspace_certification() {
    let (vp, vm) = brake_eigenspaces(&diag_real(&[1.0, -1.0])).unwrap();
    assert!(frob(&(vp.frame.adjoint() * real_mat(2, 1, &[0.0, 1.0]))) < 1e-12);
    assert!(frob(&(vm.frame.adjoint() * real_mat(2, 1, &[1.0, 0.0]))) < 1e-12);
    assert!(matches!(brake_eigenspaces(&diag_real(&[1.0, 2.0])), Err(Error::Spec(_))));
}

#[test]
fn brake_rotation_cases() {
    let o = MaslovOptions::default();
    let e1 = real_mat(2, 1, &[1.0, 0.0]);
    for b in [CMat::zeros(2, 2), eye(2)] {
        let pb = BrakeProblem {
            n: 1,
            period: 2.0 * PI,
            b: constant_fn(b),
            nmat: diag_real(&[1.0, -1.0]),
            boundary: BrakeBoundary::Graph { s: eye(2) },
        };
        if let Ok(r) = brake_symmetry_check(&pb, 128, &o) {
            assert_eq!(r.residual, 0, "{r:?}");
        }
    }
    let pb = BrakeProblem {
        n: 1,
        period: 2.0 * PI,
        b: constant_fn(eye(2)),
        nmat: diag_real(&[1.0, -1.0]),
        boundary: BrakeBoundary::Separated {
            v0: e1.clone(),
            v1: e1.clone(),
        },
    };
    let r = brake_symmetry_check(&pb, 128, &o).unwrap();
    assert_eq!(r.residual, 0, "{r:?}");
    let bad = BrakeProblem {
        boundary: BrakeBoundary::Separated {
            v0: e1,
            v1: real_mat(2, 1, &[0.0, 1.0]),
        },
        ..pb
    };
    assert!(matches!(brake_symmetry_check(&bad, 128, &o), Err(Error::Equivariance(_))));
}

#[test]
fn fundamental_domain_free_and_rotation() {
    let opts = SfOptions::default();
    let pb = IterationProblem {
        n: 1,
        period: 2.0 * PI,
        b: Arc::new(|s, _| eye(2) * c(s)),
        s0: 0.0,
        s1: 1.0,
        symmetry: DomainSymmetry::Shift {
            k: 2,
            p: eye(2),
            s: eye(2),
        },
    };
    let r = fundamental_domain_check(&pb, &SemGrid::hamiltonian_default(), &opts).unwrap();
    assert!(r.holds(), "{r:?}");
    assert_eq!(r.lhs, -2);
}

#[test]
fn geodesic_circle() {
    let pb = GeodesicProblem {
        k: 1,
        period: 2.0 * PI,
        g: eye(1),
        r: constant_fn(CMat::zeros(1, 1)),
        p: eye(1),
        omega_turns: 0.0,
    };
    let r = geodesic_iteration_check(&pb, 2, 1.0, &SemGrid::sturm_liouville_default(), &SfOptions::default())
        .unwrap();
    assert_eq!(r.residual, 0, "{r:?}");
}
