use maslov_core::maslov::*;
use maslov_core::linalg::*;
use maslov_core::error::*;
use maslov_core::maslov::MaslovOptions;
use std::sync::Arc;
use maslov_core::symplectic::{graph, lagrangian_from_frame};
use std::f64::consts::PI;

fn line(theta: f64) -> CMat {
    real_mat(2, 1, &[theta.cos(), theta.sin()])
}

fn rotating(a: f64, b: f64, speed: f64) -> LagrangianPath {
    LagrangianPath::new(a, b, j_matrix(1), Arc::new(move |t| line(speed * t)))
}

fn fixed(a: f64, b: f64) -> LagrangianPath {
    LagrangianPath::new(a, b, j_matrix(1), Arc::new(|_| line(0.0)))
}

#[test]
fn crossing_form_examples() {
    let g = crossing_form(&fixed(-1.0, 1.0), &rotating(-1.0, 1.0, 1.0), 0.0, 1e-5).unwrap();
    assert!((g[(0, 0)].re - 1.0).abs() < 1e-8);
    let g = crossing_form(&rotating(-1.0, 1.0, 1.0), &rotating(-1.0, 1.0, 1.0), 0.0, 1e-5).unwrap();
    assert!(g[(0, 0)].norm() < 1e-8);
    let g = crossing_form(&fixed(-1.0, 1.0), &rotating(-1.0, 1.0, -1.0), 0.0, 1e-5).unwrap();
    assert!((g[(0, 0)].re + 1.0).abs() < 1e-8);
}

#[test]
fn chart_oracle_tan() {
    // Γ is the derivative of tan t at 0, checked against an independent difference quotient
    let h = 1e-4;
    let oracle = ((h as f64).tan() - (-h as f64).tan()) / (2.0 * h);
    let g = crossing_form(&fixed(-1.0, 1.0), &rotating(-1.0, 1.0, 1.0), 0.0, 1e-5).unwrap();
    assert!((g[(0, 0)].re - oracle).abs() < 1e-7);
}

#[test]
fn maslov_examples() {
    let o = MaslovOptions::default();
    let q = PI / 4.0;
    let off = LagrangianPath::new(-q, q, j_matrix(1), Arc::new(|_| line(PI / 2.0 + 0.3)));
    let r = LagrangianPath::new(-q, q, j_matrix(1), Arc::new(|t| line(0.2 * t)));
    assert_eq!(maslov_index(&off, &r, &o).unwrap().total, 0);

    let rep = maslov_index(&fixed(-q, q), &rotating(-q, q, 1.0), &o).unwrap();
    assert_eq!(rep.total, 1);
    assert_eq!(rep.crossings[0].endpoint, Endpoint::Interior);
    assert_eq!(maslov_index(&fixed(0.0, q), &rotating(0.0, q, 1.0), &o).unwrap().total, 1);
    assert_eq!(maslov_index(&fixed(-q, 0.0), &rotating(-q, 0.0, 1.0), &o).unwrap().total, 0);
}

#[test]
fn rotation_graph_family() {
    let o = MaslovOptions::default();
    let lam = graph(&eye(2), 1e-12).unwrap();
    let j = j_matrix(1);
    let r = maslov_vs_graph(
        &lam,
        1,
        0.0,
        1.0,
        Arc::new(move |s| expm(&(&j * c(2.0 * PI * s)))),
        &o,
    )
    .unwrap();
    assert_eq!(r.total, 2);
    assert_eq!(r.crossings.len(), 2);
    assert_eq!(r.crossings[0].positive, 2);
    assert_eq!(r.crossings[1].contribution, 0);
}

#[test]
fn constant_graph_cases() {
    let o = MaslovOptions::default();
    let s = real_mat(2, 2, &[2.0, 0.0, 0.0, 0.5]);
    let lam = graph(&s, 1e-12).unwrap();
    let r = maslov_vs_graph(&lam, 1, 0.0, 1.0, Arc::new(|_| eye(2)), &o).unwrap();
    assert_eq!(r.total, 0);
    let lam = graph(&eye(2), 1e-12).unwrap();
    let r = maslov_vs_graph(&lam, 1, 0.0, 1.0, Arc::new(|_| eye(2)), &o);
    assert!(matches!(r, Err(Error::DegenerateCrossing { .. })));
}

#[test]
fn fixed_vs_moving_rotation() {
    let o = MaslovOptions::default();
    let v = lagrangian_from_frame(&line(0.0), 1e-12).unwrap();
    let j = j_matrix(1);
    // γ(t)V rotates by t; crossings at 0, π, 2π
    let r = maslov_fixed_vs_moving(&v, &v, 0.0, 2.0 * PI, Arc::new(move |t| expm(&(&j * c(t)))), &o)
        .unwrap();
    assert_eq!(r.total, 2);
}
