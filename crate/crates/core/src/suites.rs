//! Randomized and worked-example suites shared by the acceptance tests and the CLI.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{propagator, MatFn, TrigSeries};
use crate::iteration::*;
use crate::linalg::*;
use crate::maslov::{direct_sum, maslov_index, maslov_vs_graph, LagrangianPath, MaslovOptions};
use crate::spectral::{spectral_flow, HamiltonianFamily, HermitianPath, SemGrid, SfOptions};
use crate::symmetry::{decompose_spectral_flow, random_compatible_family};
use crate::symplectic::{
    doubled_lagrangian, gap_distance, graph, graph_frame, random_doubled_symplectic, random_symplectic,
    standard_reflection, Subspace,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub seed: u64,
    pub instances: usize,
    pub passed: usize,
    /// draws discarded for violating a generic-position precondition
    pub rejected: usize,
    pub failures: Vec<String>,
    pub seconds: f64,
}

impl SuiteOutcome {
    pub fn ok(&self) -> bool {
        self.passed == self.instances && self.failures.is_empty()
    }

    pub fn merge(name: &str, parts: Vec<SuiteOutcome>) -> SuiteOutcome {
        SuiteOutcome {
            name: name.to_string(),
            seed: parts.first().map(|p| p.seed).unwrap_or(0),
            instances: parts.iter().map(|p| p.instances).sum(),
            passed: parts.iter().map(|p| p.passed).sum(),
            rejected: parts.iter().map(|p| p.rejected).sum(),
            failures: parts
                .iter()
                .flat_map(|p| p.failures.iter().map(move |f| format!("{}: {f}", p.name)))
                .collect(),
            seconds: parts.iter().map(|p| p.seconds).sum(),
        }
    }
}

/// Precondition failures that a fresh random draw avoids with probability one.
fn is_generic_rejection(e: &Error) -> bool {
    matches!(
        e,
        Error::DegenerateCrossing { .. } | Error::Tolerance(_) | Error::Resolution(_)
    )
}

/// Run `count` instances; an instance returns Ok(Ok(())) on pass, Ok(Err(msg)) on a property failure.
pub fn run_suite(
    name: &str,
    seed: u64,
    count: usize,
    mut instance: impl FnMut(&mut ChaCha8Rng, usize) -> Result<std::result::Result<(), String>>,
) -> SuiteOutcome {
    let start = Instant::now();
    let mut r = rng(seed);
    let (mut passed, mut rejected) = (0, 0);
    let mut failures = Vec::new();
    let mut i = 0;
    while i < count {
        match instance(&mut r, i) {
            Ok(Ok(())) => {
                passed += 1;
                i += 1;
            }
            Ok(Err(msg)) => {
                failures.push(format!("#{i}: {msg}"));
                i += 1;
            }
            Err(e) if is_generic_rejection(&e) && rejected < 5 * count => rejected += 1,
            Err(e) => {
                failures.push(format!("#{i}: {e}"));
                i += 1;
            }
        }
    }
    SuiteOutcome {
        name: name.to_string(),
        seed,
        instances: count,
        passed,
        rejected,
        failures,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn expect_eq(what: &str, a: i64, b: i64) -> std::result::Result<(), String> {
    if a == b {
        Ok(())
    } else {
        Err(format!("{what}: {a} ≠ {b}"))
    }
}

fn expect_report(r: &IdentityReport) -> std::result::Result<(), String> {
    if r.holds() {
        Ok(())
    } else {
        Err(format!(
            "{}: lhs {} rhs {:?} checks {:?}",
            r.identity,
            r.lhs,
            r.rhs_terms.iter().map(|t| t.value).collect::<Vec<_>>(),
            r.checks.iter().map(|c| (c.ambient, c.reduced)).collect::<Vec<_>>()
        ))
    }
}

// ---------------------------------------------------------------------------
// −sf = μ on random periodic-coefficient systems

/// s ↦ s·B(t) on [0, T] with a fixed doubled-space boundary condition.
#[derive(Clone)]
pub struct RandomSystem {
    pub n: usize,
    pub series: TrigSeries,
    pub lambda: CMat,
}

impl RandomSystem {
    pub fn generate(rng: &mut impl Rng, n: usize, harmonics: usize, amp: f64, period: f64) -> Self {
        let series = TrigSeries::random(rng, 2 * n, harmonics, amp, period);
        let lambda = random_doubled_symplectic(rng, n, 0.6) * graph_frame(&eye(2 * n));
        RandomSystem { n, series, lambda }
    }

    pub fn period(&self) -> f64 {
        self.series.period
    }

    pub fn family(&self) -> HamiltonianFamily {
        let b = self.series.to_fn();
        let lam = self.lambda.clone();
        HamiltonianFamily {
            n: self.n,
            t0: 0.0,
            t1: self.period(),
            s0: 0.0,
            s1: 1.0,
            b: Arc::new(move |s, t| b(t) * c(s)),
            lambda: Arc::new(move |_| lam.clone()),
        }
    }

    /// s ↦ γ_s(T).
    pub fn monodromy(&self, steps: usize) -> Arc<dyn Fn(f64) -> CMat + Send + Sync> {
        let b = self.series.to_fn();
        let (n, t) = (self.n, self.period());
        Arc::new(move |s| {
            let bs = b.clone();
            let f: MatFn = Arc::new(move |x| bs(x) * c(s));
            propagator(n, &f, 0.0, t, steps)
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremCheck {
    pub minus_sf: i64,
    pub minus_sf_refined: i64,
    pub mu: i64,
}

impl TheoremCheck {
    pub fn holds(&self) -> bool {
        self.minus_sf == self.mu && self.minus_sf_refined == self.mu
    }
}

/// −sf of the discretized family at two resolutions against μ(Λ, Gr(γ_s(T))).
pub fn theorem_check(sys: &RandomSystem, grid: &SemGrid, steps: usize) -> Result<TheoremCheck> {
    let fam = sys.family();
    let opts = SfOptions::default();
    let (a, b) = rayon::join(|| fam.spectral_flow(grid, &opts), || fam.spectral_flow(&grid.refined(), &opts));
    let lam = doubled_lagrangian(&sys.lambda, 1e-8)?;
    let mu = maslov_vs_graph(&lam, sys.n, 0.0, 1.0, sys.monodromy(steps), &MaslovOptions::default())?;
    Ok(TheoremCheck {
        minus_sf: -a?.sf,
        minus_sf_refined: -b?.sf,
        mu: mu.total,
    })
}

pub fn theorem_suite(seed: u64, count: usize) -> SuiteOutcome {
    run_suite("sf-maslov equality", seed, count, |r, i| {
        let n = 1 + i % 2;
        let harmonics = r.random_range(1..=3);
        let amp = r.random_range(0.5..=2.0);
        let sys = RandomSystem::generate(r, n, harmonics, amp, 2.0 * PI);
        let chk = theorem_check(&sys, &SemGrid::hamiltonian_default(), 800)?;
        Ok(if chk.holds() {
            Ok(())
        } else {
            Err(format!("{chk:?}"))
        })
    })
}

/// B_s = sI, T = 2π, Λ = Gr(I): μ = 2, sf = −2, eigenvalue curves k − s checked on a sweep.
pub fn rotation_case() -> SuiteOutcome {
    run_suite("rotation", 0, 1, |_, _| {
        let fam = HamiltonianFamily {
            n: 1,
            t0: 0.0,
            t1: 2.0 * PI,
            s0: 0.0,
            s1: 1.0,
            b: Arc::new(|s, _| eye(2) * c(s)),
            lambda: Arc::new(|_| graph_frame(&eye(2))),
        };
        let grid = SemGrid::hamiltonian_default();
        let sf = fam.spectral_flow(&grid, &SfOptions::default())?.sf;
        let path = fam.path(&grid)?;
        // oracle: eigenvalues near zero are k − s (each twice), so the k = 0 pair crosses −ε downward
        let mut crossings = 0i64;
        let mut prev: Option<usize> = None;
        for k in 0..=40 {
            let s = k as f64 / 40.0;
            let ev = herm_eigvals(&path.matrix(s)?);
            let near: Vec<f64> = ev.iter().copied().filter(|x| x.abs() < 1.13).collect();
            let mut want: Vec<f64> = [-1.0, 0.0, 1.0, 2.0]
                .iter()
                .flat_map(|&j: &f64| [j - s, j - s])
                .filter(|x| x.abs() < 1.13)
                .collect();
            want.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if near.len() != want.len() || near.iter().zip(&want).any(|(a, b)| (a - b).abs() > 1e-8) {
                return Ok(Err(format!("spectrum at s = {s}: {near:?} vs {want:?}")));
            }
            let below = ev.iter().filter(|&&x| x < -1e-6).count();
            if let Some(p) = prev {
                crossings += p as i64 - below as i64;
            }
            prev = Some(below);
        }
        let gamma: Arc<dyn Fn(f64) -> CMat + Send + Sync> = Arc::new(|s| expm(&(j_matrix(1) * c(2.0 * PI * s))));
        let mu = maslov_vs_graph(&graph(&eye(2), 1e-8)?, 1, 0.0, 1.0, gamma, &MaslovOptions::default())?.total;
        Ok(expect_eq("μ", mu, 2)
            .and(expect_eq("sf", sf, -2))
            .and(expect_eq("sweep", crossings, -2)))
    })
}

// ---------------------------------------------------------------------------
// Hermitian-path properties

/// Random invertible matrix with condition number at most `cond`.
pub fn random_conditioned(rng: &mut impl Rng, d: usize, cond: f64) -> CMat {
    let u = orth(&random_complex(rng, d, d), 1e-14);
    let v = orth(&random_complex(rng, d, d), 1e-14);
    let sv: Vec<f64> = (0..d).map(|i| cond.powf(-(i as f64) / (d.max(2) - 1) as f64)).collect();
    u * diag_real(&sv) * v.adjoint()
}

fn random_path(rng: &mut impl Rng, d: usize) -> HermitianPath {
    let a0 = random_hermitian(rng, d);
    let a1 = random_hermitian(rng, d) * c(3.0);
    let a2 = random_hermitian(rng, d);
    HermitianPath::new(0.0, 1.0, move |s| &a0 + &a1 * c(s) + &a2 * c(s * s))
}

pub fn cogredient_suite(seed: u64, count: usize) -> SuiteOutcome {
    let opts = SfOptions::default();
    run_suite("cogredient invariance", seed, count, |r, _| {
        let d = r.random_range(1..=12);
        let path = random_path(r, d);
        let cond = 10f64.powf(r.random_range(0.0..=3.0));
        let m0 = random_conditioned(r, d, cond);
        let x = random_complex(r, d, d) * c(0.5 / (d as f64).sqrt());
        let m: Arc<dyn Fn(f64) -> CMat + Send + Sync> = Arc::new(move |s| &m0 * expm(&(&x * c(s))));
        let a = spectral_flow(&path, &opts)?.sf;
        let b = spectral_flow(&path.cogredient(m), &opts)?.sf;
        Ok(expect_eq("sf(M*AM) vs sf(A)", b, a))
    })
}

pub fn decomposition_suite(seed: u64, count: usize) -> SuiteOutcome {
    let opts = SfOptions::default();
    run_suite("decomposition", seed, count, |r, _| {
        let circle: Vec<(C64, usize)> = (0..r.random_range(1..=3))
            .map(|_| (cis(r.random_range(0.0..2.0 * PI)), r.random_range(1..=3)))
            .collect();
        let hyperbolic: Vec<(C64, usize)> = (0..r.random_range(1..=2))
            .map(|_| {
                let rad = r.random_range(1.5..3.0);
                (cis(r.random_range(0.0..2.0 * PI)) * rad, r.random_range(1..=2))
            })
            .collect();
        let kernel_at_start = r.random_bool(0.5);
        let (g, path) = random_compatible_family(r, &circle, &hyperbolic, kernel_at_start, 0.3);
        let rep = decompose_spectral_flow(&path, &g, 1e-6, &opts)?;
        Ok(expect_eq("block sum + hat term vs direct", rep.total, rep.direct))
    })
}

pub fn half_kernel_case() -> SuiteOutcome {
    run_suite("off-circle half-kernel", 0, 1, |_, _| {
        let g = diag_real(&[2.0, 0.5]);
        let path = HermitianPath::new(0.0, 1.0, |s| real_mat(2, 2, &[0.0, s, s, 0.0]));
        let rep = decompose_spectral_flow(&path, &g, 1e-8, &SfOptions::default())?;
        Ok(expect_eq("sf", rep.direct, -1)
            .and(expect_eq("hat term", rep.hat_term, -1))
            .and(expect_eq("hat kernels", rep.hat_kernel_b as i64 - rep.hat_kernel_a as i64, -2))
            .and(expect_eq("residual", rep.residual, 0)))
    })
}

// ---------------------------------------------------------------------------
// Iteration identities

pub fn bott_suite(seed: u64, perturbed: usize) -> SuiteOutcome {
    let opts = MaslovOptions::default();
    let cases: Vec<(usize, f64)> = [2, 3, 4]
        .iter()
        .flat_map(|&m| [(m, 0.0), (m, 1.0 / 6.0)])
        .collect();
    let rotation = run_suite("bott rotation", seed, cases.len(), |_, i| {
        let (m, turns) = cases[i];
        let pb = BottProblem {
            n: 1,
            tau: 2.0 * PI,
            b: crate::flow::constant_fn(eye(2)),
            p: eye(2) * cis(2.0 * PI * turns / m as f64),
            omega_turns: turns,
        };
        Ok(expect_report(&bott_iteration_check(&pb, m, 96, &opts)?))
    });
    let perturbed = run_suite("bott perturbed", seed + 1, perturbed, |r, _| {
        let m = r.random_range(2..=3);
        let turns = if r.random_bool(0.5) { 0.0 } else { 1.0 / 6.0 };
        let mut s = TrigSeries::random(r, 2, 2, 0.3, 2.0 * PI);
        s.a0 += eye(2);
        let pb = BottProblem {
            n: 1,
            tau: 2.0 * PI,
            b: s.to_fn(),
            p: eye(2) * cis(2.0 * PI * turns / m as f64),
            omega_turns: turns,
        };
        Ok(expect_report(&bott_iteration_check(&pb, m, 96, &opts)?))
    });
    SuiteOutcome::merge("bott iteration", vec![rotation, perturbed])
}

/// ½(B(t) + N* B(T − t) N).
pub fn brake_symmetrized(series: &TrigSeries, nmat: &CMat, period: f64) -> MatFn {
    let (s, nm) = (series.clone(), nmat.clone());
    Arc::new(move |t| (s.eval(t) + nm.adjoint() * s.eval(period - t) * &nm) * c(0.5))
}

pub fn brake_suite(seed: u64, count: usize) -> SuiteOutcome {
    let opts = MaslovOptions::default();
    let nmat = diag_real(&[1.0, -1.0]);
    let e1 = real_mat(2, 1, &[1.0, 0.0]);
    run_suite("brake", seed, count, |r, _| {
        let t = 2.0 * PI;
        let mut s = TrigSeries::random(r, 2, 2, 0.6, t);
        s.a0 += eye(2) * c(r.random_range(0.5..2.0));
        let b = brake_symmetrized(&s, &nmat, t);
        let graph_case = BrakeProblem {
            n: 1,
            period: t,
            b: b.clone(),
            nmat: nmat.clone(),
            boundary: BrakeBoundary::Graph { s: eye(2) },
        };
        let sep = BrakeProblem {
            boundary: BrakeBoundary::Separated {
                v0: e1.clone(),
                v1: e1.clone(),
            },
            ..graph_case.clone()
        };
        let a = brake_symmetry_check(&graph_case, 400, &opts)?;
        let b = brake_symmetry_check(&sep, 400, &opts)?;
        Ok(expect_report(&a).and(expect_report(&b)))
    })
}

/// B(t) = Q(t)ᵀ B₀(t) Q(t) with Q(t) = exp(φ k t J / T) and B₀ of period T/k, so B(t) = Pᵀ B(t − T/k) P.
pub fn twisted_periodic(rng: &mut impl Rng, n: usize, k: usize, phi: f64, period: f64, amp: f64) -> MatFn {
    let b0 = TrigSeries::random(rng, 2 * n, 2, amp, period / k as f64);
    let j = j_matrix(n);
    Arc::new(move |t| {
        let q = expm(&(&j * c(phi * k as f64 * t / period)));
        q.adjoint() * b0.eval(t) * q
    })
}

pub fn fundamental_domain_suite(seed: u64, per_case: usize) -> SuiteOutcome {
    let opts = SfOptions::default();
    let t = 2.0 * PI;
    let shift = |k: usize, sd: u64| {
        run_suite(&format!("shift k={k}"), sd, per_case, move |r, _| {
            let phi = r.random_range(0.2..1.2);
            let p = expm(&(j_matrix(1) * c(phi)));
            let mut pk = eye(2);
            for _ in 0..k {
                pk = &pk * &p;
            }
            let b = twisted_periodic(r, 1, k, phi, t, 0.8);
            let shift = r.random_range(0.5..1.5);
            let pb = IterationProblem {
                n: 1,
                period: t,
                b: Arc::new(move |s, x| (b(x) + eye(2) * c(shift)) * c(s)),
                s0: 0.0,
                s1: 1.0,
                symmetry: DomainSymmetry::Shift { k, p, s: pk },
            };
            let grid = SemGrid::new(2 * k, 16)?;
            let a = fundamental_domain_check(&pb, &grid, &opts)?;
            let b = fundamental_domain_check(&pb, &grid.refined(), &opts)?;
            Ok(expect_report(&a).and(expect_eq("grid doubling", a.lhs, b.lhs)))
        })
    };
    let nmat = diag_real(&[1.0, -1.0]);
    let e1 = real_mat(2, 1, &[1.0, 0.0]);
    let brake = |separated: bool, sd: u64| {
        let (nmat, e1) = (nmat.clone(), e1.clone());
        run_suite(
            if separated { "brake separated" } else { "brake graph" },
            sd,
            per_case,
            move |r, _| {
                let mut s = TrigSeries::random(r, 2, 2, 0.8, t);
                s.a0 += eye(2) * c(r.random_range(0.5..1.5));
                let b = brake_symmetrized(&s, &nmat, t);
                let boundary = if separated {
                    BrakeBoundary::Separated {
                        v0: e1.clone(),
                        v1: e1.clone(),
                    }
                } else {
                    BrakeBoundary::Graph { s: eye(2) }
                };
                let pb = IterationProblem {
                    n: 1,
                    period: t,
                    b: Arc::new(move |s, x| b(x) * c(s)),
                    s0: 0.0,
                    s1: 1.0,
                    symmetry: DomainSymmetry::Brake {
                        nmat: nmat.clone(),
                        boundary,
                    },
                };
                Ok(expect_report(&fundamental_domain_check(&pb, &SemGrid::hamiltonian_default(), &opts)?))
            },
        )
    };
    SuiteOutcome::merge(
        "fundamental domains",
        vec![shift(2, seed), shift(3, seed + 1), brake(false, seed + 2), brake(true, seed + 3)],
    )
}

/// diag(−1, 1) + λ c sech²(t) E on ℝ (n = 1), or its two-degree-of-freedom sum.
pub fn bump_family(depths: &[f64], e: &CMat) -> LineFamily {
    let n = depths.len();
    let mut base = vec![-1.0; n];
    base.extend(std::iter::repeat_n(1.0, n));
    let binf = diag_real(&base);
    let (d, e, b0) = (depths.to_vec(), e.clone(), binf.clone());
    LineFamily {
        n,
        b: Arc::new(move |lam, t: f64| {
            let w = 1.0 / t.cosh().powi(2);
            let mut m = b0.clone();
            for (i, &di) in d.iter().enumerate() {
                m[(i, i)] += c(lam * di * w * e[(0, 0)].re);
                m[(i + n, i + n)] += c(lam * di * w * e[(1, 1)].re);
            }
            m
        }),
        b_minus: {
            let b = binf.clone();
            Arc::new(move |_| b.clone())
        },
        b_plus: Arc::new(move |_| binf.clone()),
    }
}

fn constant_family(a: f64, b: f64) -> LineFamily {
    let f = move |lam: f64| diag_real(&[-(a + lam), b + 0.5 * lam]);
    LineFamily {
        n: 1,
        b: Arc::new(move |lam, _| f(lam)),
        b_minus: Arc::new(move |lam| f(lam)),
        b_plus: Arc::new(move |lam| f(lam)),
    }
}

pub fn heteroclinic_suite(seed: u64) -> SuiteOutcome {
    let mopts = MaslovOptions::default();
    let sopts = SfOptions::default();
    let l = 8.0;
    let constant = run_suite("constant coefficients", seed, 3, |r, _| {
        let fam = constant_family(r.random_range(0.5..2.0), r.random_range(0.5..2.0));
        let rep = heteroclinic_brake_check(&fam, &diag_real(&[1.0, -1.0]), l, 400, &mopts)?;
        Ok(expect_report(&rep.minus_side)
            .and(expect_report(&rep.plus_side))
            .and(expect_eq("μ(V^s, V^u)", rep.minus_side.lhs, 0)))
    });
    let cases: Vec<(Vec<f64>, CMat)> = vec![
        (vec![0.7], diag_real(&[1.0, 0.0])),
        (vec![3.0], diag_real(&[1.0, 0.0])),
        (vec![7.0], diag_real(&[1.0, 0.0])),
        (vec![0.4], diag_real(&[1.0, 1.0])),
        (vec![3.0, 7.0], diag_real(&[1.0, 0.0])),
    ];
    let bumps = run_suite("sech² bumps", seed, cases.len(), |_, i| {
        let (depths, e) = &cases[i];
        let fam = bump_family(depths, e);
        let n = depths.len();
        let nmat = standard_reflection(n);
        let rep = heteroclinic_brake_check(&fam, &nmat, l, (60.0 * l) as usize, &mopts)?;
        let grid = SemGrid::hamiltonian_default();
        let (sf, mu) = heteroclinic_sf_consistency(&fam, l, &grid, (60.0 * l) as usize, &mopts, &sopts)?;
        let (sf2, _) = heteroclinic_sf_consistency(&fam, l, &grid.refined(), (60.0 * l) as usize, &mopts, &sopts)?;
        let b1: MatFn = {
            let b = fam.b.clone();
            Arc::new(move |t| b(1.0, t))
        };
        let binf = (fam.b_minus)(0.0);
        let h = homoclinic_index_decomposition(n, b1.clone(), &binf, &nmat, l, &grid, &sopts)?;
        let h2 = homoclinic_index_decomposition(n, b1.clone(), &binf, &nmat, l, &grid.refined(), &sopts)?;
        let h3 = homoclinic_index_decomposition(n, b1, &binf, &nmat, 1.5 * l, &grid, &sopts)?;
        Ok(expect_report(&rep.minus_side)
            .and(expect_report(&rep.plus_side))
            .and(expect_eq("−sf vs μ(V^s, V^u)", sf, mu))
            .and(expect_eq("−sf under grid doubling", sf2, sf))
            .and(expect_eq("μ(V^s, V^u) vs heteroclinic LHS", mu, rep.minus_side.lhs))
            .and(expect_report(&h))
            .and(expect_report(&h2))
            .and(expect_report(&h3))
            .and(expect_eq("homoclinic grid doubling", h2.lhs, h.lhs))
            .and(expect_eq("homoclinic L → 1.5L", h3.lhs, h.lhs))
            .and(expect_eq(
                "homoclinic blocks under L → 1.5L",
                h3.rhs_terms[0].value,
                h.rhs_terms[0].value,
            )))
    });
    SuiteOutcome::merge("heteroclinic and homoclinic", vec![constant, bumps])
}

pub fn geodesic_suite() -> SuiteOutcome {
    let opts = SfOptions::default();
    let t = 2.0 * PI;
    struct Case {
        g: CMat,
        r: MatFn,
        p: CMat,
        turns: f64,
        m: usize,
    }
    let bump = |a: f64, b: f64| -> MatFn { Arc::new(move |x: f64| diag_real(&[a + 0.3 * x.cos(), b])) };
    let cases = vec![
        Case {
            g: eye(1),
            r: crate::flow::constant_fn(diag_real(&[-2.3])),
            p: eye(1),
            turns: 0.0,
            m: 2,
        },
        Case {
            g: eye(1),
            r: Arc::new(|x: f64| diag_real(&[-1.7 + 0.5 * x.cos()])),
            p: eye(1),
            turns: 0.25,
            m: 3,
        },
        Case {
            g: diag_real(&[1.0, -1.0]),
            r: crate::flow::constant_fn(CMat::zeros(2, 2)),
            p: eye(2),
            turns: 0.0,
            m: 2,
        },
        Case {
            g: diag_real(&[1.0, -1.0]),
            r: bump(-1.3, -0.6),
            p: diag_real(&[1.0, -1.0]),
            turns: 0.1,
            m: 3,
        },
        Case {
            g: diag_real(&[1.0, 1.0, -1.0]),
            r: Arc::new(|x: f64| diag_real(&[-0.8, -2.1 + 0.4 * x.sin(), 1.5])),
            p: eye(3),
            turns: 0.5,
            m: 2,
        },
    ];
    run_suite("geodesic iteration", 0, cases.len(), |_, i| {
        let cs = &cases[i];
        let pb = GeodesicProblem {
            k: cs.g.nrows(),
            period: t,
            g: cs.g.clone(),
            r: cs.r.clone(),
            p: cs.p.clone(),
            omega_turns: cs.turns,
        };
        let rep = geodesic_iteration_check(&pb, cs.m, 1.0, &SemGrid::sturm_liouville_default(), &opts)?;
        Ok(expect_report(&rep))
    })
}

// ---------------------------------------------------------------------------
// Axioms

pub fn sf_axiom_suites(seed: u64, count: usize) -> Vec<SuiteOutcome> {
    let opts = SfOptions::default();
    let sf = |p: &HermitianPath| spectral_flow(p, &opts).map(|r| r.sf);
    vec![
        run_suite("sf nullity", seed, count, |r, _| {
            let d = r.random_range(1..=8);
            let dvals: Vec<f64> = (0..d)
                .map(|_| r.random_range(0.1..2.0) * if r.random_bool(0.5) { 1.0 } else { -1.0 })
                .collect();
            let h = random_hermitian(r, d);
            let dm = diag_real(&dvals);
            let p = HermitianPath::new(0.0, 1.0, move |s| {
                let u = expm(&(&h * ci(0.0, 3.0 * s)));
                u.adjoint() * &dm * u
            });
            Ok(expect_eq("sf", sf(&p)?, 0))
        }),
        run_suite("sf path additivity", seed + 1, count, |r, _| {
            let p = { let d = r.random_range(1..=8); random_path(r, d) };
            let m = r.random_range(0.05..0.95);
            Ok(expect_eq("sf", sf(&p.restricted(0.0, m))? + sf(&p.restricted(m, 1.0))?, sf(&p)?))
        }),
        run_suite("sf direct sum", seed + 2, count, |r, _| {
            let p = { let d = r.random_range(1..=6); random_path(r, d) };
            let q = { let d = r.random_range(1..=6); random_path(r, d) };
            Ok(expect_eq("sf", sf(&p.direct_sum(&q))?, sf(&p)? + sf(&q)?))
        }),
        run_suite("sf reversal", seed + 3, count, |r, _| {
            let p = { let d = r.random_range(1..=8); random_path(r, d) };
            Ok(expect_eq("sf", sf(&p.reversed())?, -sf(&p)?))
        }),
        run_suite("sf stratum homotopy", seed + 4, count, |r, _| {
            let d = r.random_range(1..=8);
            let p = random_path(r, d);
            let x = random_hermitian(r, d) * c(r.random_range(0.5..4.0));
            let a = r.random_range(-0.9..0.9);
            let pe = p.clone();
            let bent = HermitianPath::fallible(
                0.0,
                1.0,
                Arc::new(move |s| Ok(pe.raw(s)? + &x * c((PI * s).sin()))),
            );
            let phi: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(move |s| s + a * (PI * s).sin() / PI);
            let re = p.reparametrized(0.0, 1.0, phi);
            let base = sf(&p)?;
            Ok(expect_eq("bent", sf(&bent)?, base).and(expect_eq("reparametrized", sf(&re)?, base)))
        }),
    ]
}

/// t ↦ exp(t J S) V on [0, 1] with V a random Lagrangian.
fn random_lagrangian_path(rng: &mut impl Rng, n: usize) -> (LagrangianPath, CMat, CMat) {
    let j = j_matrix(n);
    let v = random_symplectic(rng, n, 0.7, 2) * vstack(&eye(n), &CMat::zeros(n, n));
    let s = random_real_symmetric(rng, 2 * n) * c(rng.random_range(1.0..4.0));
    let (j2, s2, v2) = (j.clone(), s.clone(), v.clone());
    let p = LagrangianPath::new(0.0, 1.0, j.clone(), Arc::new(move |t| expm(&(&j2 * &s2 * c(t))) * &v2));
    (p, s, v)
}

pub fn maslov_axiom_suites(seed: u64, count: usize) -> Vec<SuiteOutcome> {
    let opts = MaslovOptions::default();
    let mu = |a: &LagrangianPath, b: &LagrangianPath| maslov_index(a, b, &opts).map(|r| r.total);
    vec![
        run_suite("maslov reparametrization", seed, count, |r, _| {
            let n = r.random_range(1..=2);
            let (p, _, _) = random_lagrangian_path(r, n);
            let (q, _, _) = random_lagrangian_path(r, n);
            let a = r.random_range(-0.9..0.9);
            let phi: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(move |s| s + a * (PI * s).sin() / PI);
            let base = mu(&p, &q)?;
            Ok(expect_eq(
                "μ",
                mu(&p.reparametrized(0.0, 1.0, phi.clone()), &q.reparametrized(0.0, 1.0, phi))?,
                base,
            ))
        }),
        run_suite("maslov symplectic invariance", seed + 1, count, |r, _| {
            let n = r.random_range(1..=2);
            let (p, _, _) = random_lagrangian_path(r, n);
            let (q, _, _) = random_lagrangian_path(r, n);
            let m0 = random_symplectic(r, n, 0.6, 2);
            let x = random_real_symmetric(r, 2 * n) * c(0.5);
            let j = j_matrix(n);
            let jx = &j * x;
            let m: Arc<dyn Fn(f64) -> CMat + Send + Sync> = Arc::new(move |t| &m0 * expm(&(&jx * c(t))));
            let base = mu(&p, &q)?;
            Ok(expect_eq(
                "μ",
                mu(&p.transformed(m.clone(), j.clone()), &q.transformed(m, j))?,
                base,
            ))
        }),
        run_suite("maslov symplectic additivity", seed + 2, count, |r, _| {
            let (p1, _, _) = random_lagrangian_path(r, 1);
            let (p2, _, _) = random_lagrangian_path(r, 1);
            let n2 = r.random_range(1..=2);
            let (q1, _, _) = random_lagrangian_path(r, n2);
            let (q2, _, _) = random_lagrangian_path(r, n2);
            Ok(expect_eq(
                "μ",
                mu(&direct_sum(&p1, &q1), &direct_sum(&p2, &q2))?,
                mu(&p1, &p2)? + mu(&q1, &q2)?,
            ))
        }),
        run_suite("maslov path additivity", seed + 3, count, |r, _| {
            let n = r.random_range(1..=2);
            let (p, _, _) = random_lagrangian_path(r, n);
            let (q, _, _) = random_lagrangian_path(r, n);
            let m = r.random_range(0.05..0.95);
            Ok(expect_eq(
                "μ",
                mu(&p.restricted(0.0, m), &q.restricted(0.0, m))? + mu(&p.restricted(m, 1.0), &q.restricted(m, 1.0))?,
                mu(&p, &q)?,
            ))
        }),
        run_suite("maslov homotopy", seed + 4, count, |r, _| {
            let n = r.random_range(1..=2);
            let (p, _, _) = random_lagrangian_path(r, n);
            let (_, s, v) = random_lagrangian_path(r, n);
            let x = random_real_symmetric(r, 2 * n) * c(r.random_range(0.5..2.0));
            let j = j_matrix(n);
            let bend = |h: f64| {
                let (j2, s2, x2, v2) = (j.clone(), s.clone(), x.clone(), v.clone());
                LagrangianPath::new(
                    0.0,
                    1.0,
                    j.clone(),
                    Arc::new(move |t| expm(&(&j2 * (&s2 * c(t) + &x2 * c(h * (PI * t).sin())))) * &v2),
                )
            };
            Ok(expect_eq("μ", mu(&p, &bend(1.0))?, mu(&p, &bend(0.0))?))
        }),
    ]
}

// ---------------------------------------------------------------------------
// Gap metric

/// δ̂(M, N) max(‖P‖, ‖Q‖) + ‖P − Q‖ max(‖P⁻¹‖, ‖Q⁻¹‖).
pub fn gap_transform_bound(gap_mn: f64, p: &CMat, q: &CMat) -> Result<f64> {
    let pi = inverse(p).ok_or(Error::Singular { sigma_min: 0.0 })?;
    let qi = inverse(q).ok_or(Error::Singular { sigma_min: 0.0 })?;
    Ok(gap_mn * op_norm(p).max(op_norm(q)) + op_norm(&(p - q)) * op_norm(&pi).max(op_norm(&qi)))
}

/// max(‖P⁻¹‖, ‖Q⁻¹‖)·(δ̂(M, N) max(‖P‖, ‖Q‖) + ‖P − Q‖), valid for every invertible P, Q.
pub fn gap_transform_bound_conditioned(gap_mn: f64, p: &CMat, q: &CMat) -> Result<f64> {
    let pi = inverse(p).ok_or(Error::Singular { sigma_min: 0.0 })?;
    let qi = inverse(q).ok_or(Error::Singular { sigma_min: 0.0 })?;
    Ok(op_norm(&pi).max(op_norm(&qi)) * (gap_mn * op_norm(p).max(op_norm(q)) + op_norm(&(p - q))))
}

pub fn gap_suite(seed: u64, count: usize) -> SuiteOutcome {
    run_suite("gap inequality", seed, count, |r, _| {
        let d = r.random_range(2..=8);
        let k = r.random_range(1..d);
        let m = random_complex(r, d, k);
        let eps = 10f64.powf(r.random_range(-3.0..0.0));
        let nb = &m + random_complex(r, d, k) * c(eps);
        let p = random_complex(r, d, d);
        let delta = 10f64.powf(r.random_range(-3.0..0.0));
        let q = &p + random_complex(r, d, d) * c(delta);
        let (ms, ns) = (Subspace::from_basis(&m, 1e-12), Subspace::from_basis(&nb, 1e-12));
        let lhs = gap_distance(&Subspace::from_basis(&(&p * &m), 1e-12), &Subspace::from_basis(&(&q * &nb), 1e-12));
        let gap_mn = gap_distance(&ms, &ns);
        let bound = gap_transform_bound(gap_mn, &p, &q)?;
        let safe = gap_transform_bound_conditioned(gap_mn, &p, &q)?;
        Ok(if lhs > bound + 1e-10 {
            Err(format!("{lhs:.6e} > {bound:.6e}"))
        } else if lhs > safe + 1e-10 {
            Err(format!("{lhs:.6e} > conditioned {safe:.6e}"))
        } else {
            Ok(())
        })
    })
}

// ---------------------------------------------------------------------------
// Morse index splitting

pub fn morse_suite(seed: u64, count: usize) -> SuiteOutcome {
    let nmat = diag_real(&[1.0, -1.0]);
    run_suite("morse splitting", seed, count, |r, _| {
        let l = r.random_range(2.0..4.0);
        let (g1, g2) = (r.random_range(1.0..2.0), r.random_range(1.0..2.0));
        let (wg, go) = (r.random_range(0.5..2.0), r.random_range(-0.3..0.3));
        let (r1, r2) = (r.random_range(-6.0..1.0), r.random_range(-6.0..1.0));
        let (wr, ro, ra) = (r.random_range(0.5..2.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let g: MatFn = Arc::new(move |t: f64| {
            let o = go * (wg * t).sin();
            real_mat(2, 2, &[g1 + 0.2 * (wg * t).cos(), o, o, g2])
        });
        let rr: MatFn = Arc::new(move |t: f64| {
            let o = ro * (wr * t).sin();
            real_mat(2, 2, &[r1 + ra * (wr * t).cos(), o, o, r2 - ra * (wr * t).cos()])
        });
        let rep = morse_index_decomposition(2, l, g, rr, &nmat, &SemGrid::sturm_liouville_default(), 1e-8)?;
        Ok(expect_report(&rep))
    })
}
