use maslov_core::spectral::*;
use maslov_core::linalg::*;
use maslov_core::spectral::SfOptions;
use maslov_core::spectral::SemGrid;
use std::sync::Arc;
use maslov_core::symplectic::graph_frame;
use std::f64::consts::PI;

#[test]
fn sf_examples() {
    let o = SfOptions::default();
    let p = HermitianPath::constant(0.0, 1.0, diag_real(&[1.0, -1.0]));
    assert_eq!(spectral_flow(&p, &o).unwrap().sf, 0);
    let p = HermitianPath::new(-1.0, 1.0, |s| diag_real(&[s]));
    assert_eq!(spectral_flow(&p, &o).unwrap().sf, 1);
    let p = HermitianPath::new(0.0, 1.0, |s| real_mat(2, 2, &[0.0, s, s, 0.0]));
    let r = spectral_flow(&p, &o).unwrap();
    assert_eq!(r.sf, -1);
    assert_eq!(r.kernel_a, 2);
}

#[test]
fn relative_morse_examples() {
    let o = SfOptions::default();
    assert_eq!(relative_morse_index(&diag_real(&[1.0, -1.0]), &diag_real(&[2.0, 0.0]), &o).unwrap(), 1);
    assert_eq!(relative_morse_index(&diag_real(&[1.0, -1.0]), &CMat::zeros(2, 2), &o).unwrap(), 0);
    assert_eq!(relative_morse_index(&eye(3), &diag_real(&[2.0, 2.0, 0.0]), &o).unwrap(), 2);
    assert_eq!(morse_index(&diag_real(&[1.0, 2.0, 3.0]), 1e-12), 0);
    assert_eq!(morse_index(&diag_real(&[-1.0, 0.0, 1.0]), 1e-12), 1);
}

#[test]
fn periodic_free_spectrum() {
    let lam = graph_frame(&eye(2));
    let grid = SemGrid::hamiltonian_default();
    let (theta, _) = select_gauge(1, &[lam.clone()], &grid).unwrap();
    let op = discretize_hamiltonian(1, 0.0, 2.0 * PI, &|_| CMat::zeros(2, 2), &lam, &grid, theta).unwrap();
    let ev = op.eigenvalues_near_zero(6).unwrap();
    let want = [-1.0, -1.0, 0.0, 0.0, 1.0, 1.0];
    for (a, b) in ev.iter().zip(want) {
        assert!((a - b).abs() < 1e-3, "{ev:?}");
    }
    assert_eq!(op.codimension(), (grid.elements - 1) * 2 + 2);
}

#[test]
fn separated_free_kernel() {
    let mut z = CMat::zeros(4, 2);
    z[(0, 0)] = c(1.0);
    z[(2, 1)] = c(1.0);
    let grid = SemGrid::hamiltonian_default();
    let (theta, _) = select_gauge(1, &[z.clone()], &grid).unwrap();
    let op = discretize_hamiltonian(1, 0.0, PI, &|_| CMat::zeros(2, 2), &z, &grid, theta).unwrap();
    let ev = op.eigenvalues_near_zero(1).unwrap();
    assert!(ev[0].abs() < 1e-8);
}

#[test]
fn rotation_family_sf() {
    let fam = HamiltonianFamily {
        n: 1,
        t0: 0.0,
        t1: 2.0 * PI,
        s0: 0.0,
        s1: 1.0,
        b: Arc::new(|s, _| eye(2) * c(s)),
        lambda: Arc::new(|_| graph_frame(&eye(2))),
    };
    let r = fam.spectral_flow(&SemGrid::hamiltonian_default(), &SfOptions::default()).unwrap();
    assert_eq!(r.sf, -2);
}

#[test]
fn sturm_liouville_examples() {
    let grid = SemGrid::sturm_liouville_default();
    let one = |_: f64| eye(1);
    let zero = |_: f64| CMat::zeros(1, 1);
    let op = discretize_sturm_liouville(1, 0.0, 2.0 * PI, &one, &zero, &SlBoundary::periodic(1), &grid).unwrap();
    let ev = op.eigenvalues_near_zero(5).unwrap();
    for (a, b) in ev.iter().zip([0.0, 1.0, 1.0, 4.0, 4.0]) {
        assert!((a - b).abs() < 1e-6, "{ev:?}");
    }
    let quarter = |_: f64| eye(1) * c(-0.25);
    let anti = SlBoundary::Twisted { omega: c(-1.0), p: eye(1) };
    let op = discretize_sturm_liouville(1, 0.0, 2.0 * PI, &one, &quarter, &anti, &grid).unwrap();
    assert!(op.eigenvalues_near_zero(1).unwrap()[0].abs() < 1e-6);

    let g = |_: f64| diag_real(&[1.0, -1.0]);
    let z2 = |_: f64| CMat::zeros(2, 2);
    let op = discretize_sturm_liouville(2, 0.0, 2.0 * PI, &g, &z2, &SlBoundary::periodic(2), &grid).unwrap();
    let ev = op.eigenvalues_near_zero(10).unwrap();
    for k in 0..10 {
        assert!((ev[k] + ev[9 - k]).abs() < 1e-6, "{ev:?}");
    }

    let shift = |_: f64| eye(1) * c(-2.5);
    let op = discretize_sturm_liouville(1, 0.0, PI, &one, &shift, &SlBoundary::Dirichlet, &grid).unwrap();
    assert_eq!(morse_index(&op.reduced().unwrap(), 1e-8), 1);
}
