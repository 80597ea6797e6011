use std::f64::consts::PI;
use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use maslov_core::linalg::*;
use maslov_core::maslov::{maslov_vs_graph, MaslovOptions};
use maslov_core::spectral::{discretize_hamiltonian, spectral_flow, HermitianPath, SemGrid, SfOptions};
use maslov_core::suites::{rng, RandomSystem};
use maslov_core::symplectic::{doubled_lagrangian, graph};
use maslov_core::CMat;

fn discretization(cr: &mut Criterion) {
    let sys = RandomSystem::generate(&mut rng(1), 2, 3, 1.5, 2.0 * PI);
    let b = sys.series.to_fn();
    let mut g = cr.benchmark_group("discretize");
    for grid in [SemGrid::hamiltonian_default(), SemGrid::hamiltonian_default().refined()] {
        g.bench_function(format!("hamiltonian n=2 M={}", grid.elements), |bch| {
            bch.iter(|| {
                let op = discretize_hamiltonian(2, 0.0, 2.0 * PI, &*b, &sys.lambda, &grid, 0.3).unwrap();
                black_box(op.reduced().unwrap())
            })
        });
    }
    g.finish();
}

fn spectral(cr: &mut Criterion) {
    let mut r = rng(2);
    let (a0, a1) = (random_hermitian(&mut r, 64), random_hermitian(&mut r, 64));
    let path = HermitianPath::new(0.0, 1.0, move |s| &a0 + &a1 * c(s));
    cr.bench_function("sf dense d=64", |b| b.iter(|| black_box(spectral_flow(&path, &SfOptions::default()).unwrap())));

    let sys = RandomSystem::generate(&mut rng(3), 1, 2, 1.0, 2.0 * PI);
    let fam = sys.family();
    let grid = SemGrid::hamiltonian_default();
    cr.bench_function("sf hamiltonian family n=1", |b| {
        b.iter(|| black_box(fam.spectral_flow(&grid, &SfOptions::default()).unwrap()))
    });
}

fn maslov(cr: &mut Criterion) {
    let gamma: Arc<dyn Fn(f64) -> CMat + Send + Sync> = Arc::new(|s| expm(&(j_matrix(1) * c(2.0 * PI * s))));
    let lam = graph(&eye(2), 1e-8).unwrap();
    cr.bench_function("maslov rotation", |b| {
        b.iter(|| black_box(maslov_vs_graph(&lam, 1, 0.0, 1.0, gamma.clone(), &MaslovOptions::default()).unwrap()))
    });

    let sys = RandomSystem::generate(&mut rng(4), 2, 2, 1.0, 2.0 * PI);
    let lam = doubled_lagrangian(&sys.lambda, 1e-8).unwrap();
    let mono = sys.monodromy(200);
    let mut g = cr.benchmark_group("maslov monodromy");
    g.sample_size(10);
    g.bench_function("n=2", |b| {
        b.iter(|| black_box(maslov_vs_graph(&lam, 2, 0.0, 1.0, mono.clone(), &MaslovOptions::default())))
    });
    g.finish();
}

criterion_group!(benches, discretization, spectral, maslov);
criterion_main!(benches);
