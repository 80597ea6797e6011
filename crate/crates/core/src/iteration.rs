//! Iteration and decomposition identities, each side computed by an independent pipeline.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{
    fundamental_solution, hyperbolicity_check, spectral_subspace, stable_at_zero, unstable_at_zero, HamiltonianSystem,
    MatFn,
};
use crate::linalg::*;
use crate::maslov::{maslov_index, maslov_vs_graph, LagrangianPath, MaslovOptions, MaslovReport};
use crate::spectral::{
    discretize_sturm_liouville, morse_index, spectral_flow, FamilyFn, HamiltonianFamily, HermitianPath, SemGrid,
    SfOptions, SfReport, SlBoundary,
};
use crate::symmetry::{build_symmetry, check_equivariance, compress, SymmetrySpec};
use crate::symplectic::{
    doubled_lagrangian, graph, graph_frame, is_anti_symplectic, is_symplectic, lagrangian_from_frame, separated,
    subspace_intersection_dim, LagrangianFrame,
};

#[derive(Clone, Debug, Serialize)]
pub struct Term {
    pub label: String,
    pub value: i64,
}

/// Block-level comparison of two realizations of the same quantity.
#[derive(Clone, Debug, Serialize)]
pub struct BlockCheck {
    pub label: String,
    pub ambient: i64,
    pub reduced: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub lhs: i64,
    pub rhs_terms: Vec<Term>,
    pub rhs: i64,
    pub residual: i64,
    pub checks: Vec<BlockCheck>,
    pub diagnostics: Vec<String>,
}

impl IdentityReport {
    fn new(identity: &str, lhs: i64, rhs_terms: Vec<Term>) -> Self {
        let rhs = rhs_terms.iter().map(|t| t.value).sum();
        IdentityReport {
            identity: identity.to_string(),
            lhs,
            rhs,
            residual: lhs - rhs,
            rhs_terms,
            checks: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    /// Residual zero and every block check in agreement.
    pub fn holds(&self) -> bool {
        self.residual == 0 && self.checks.iter().all(|c| c.ambient == c.reduced)
    }
}

fn term(label: impl Into<String>, value: i64) -> Term {
    Term {
        label: label.into(),
        value,
    }
}

/// e^{2πi(θ+j)/m}, j = 0..m, for ω = e^{2πiθ}.
pub fn roots_of(theta: f64, m: usize) -> Vec<C64> {
    (0..m)
        .map(|j| cis(2.0 * std::f64::consts::PI * (theta + j as f64) / m as f64))
        .collect()
}

/// ±1 eigenspace of an involution.
pub fn involution_eigenspace(m: &CMat, sign: f64) -> CMat {
    null_space(&(m - eye(m.nrows()) * c(sign)), 1e-10)
}

fn crossing_summary(label: &str, r: &MaslovReport) -> String {
    let ts: Vec<String> = r
        .crossings
        .iter()
        .map(|c| format!("t={:.6}:{:+}", c.t, c.contribution))
        .collect();
    format!("{label}: μ = {} [{}]", r.total, ts.join(", "))
}

fn check_b_relation(
    b: &MatFn,
    samples: &[f64],
    tol: f64,
    rel: impl Fn(f64, &CMat) -> CMat,
    what: &str,
) -> Result<()> {
    for &t in samples {
        let lhs = b(t);
        let rhs = rel(t, &lhs);
        let r = frob(&(&lhs - &rhs)) / frob(&lhs).max(1.0);
        if r > tol {
            return Err(Error::Spec(format!("{what} fails at t = {t:.6} (residual {r:.3e})")));
        }
    }
    Ok(())
}

fn sample_points(a: f64, b: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| a + (b - a) * (i as f64 + 0.37) / k as f64).collect()
}

fn flow_gamma(n: usize, b: &MatFn, t0: f64, t1: f64, steps: usize) -> Result<Arc<dyn Fn(f64) -> CMat + Send + Sync>> {
    let sys = HamiltonianSystem::on_interval(n, t0, t1, b.clone());
    let f = fundamental_solution(&sys, steps)?;
    Ok(Arc::new(move |t| f.at(t)))
}

// ---------------------------------------------------------------------------
// Bott iteration

/// τ-periodic twisted system: B(t + τ) = P* B(t) P, boundary on [0, mτ] given by ωS = P^m.
#[derive(Clone)]
pub struct BottProblem {
    pub n: usize,
    pub tau: f64,
    pub b: MatFn,
    pub p: CMat,
    /// ω = e^{2πi·omega_turns}
    pub omega_turns: f64,
}

pub fn bott_iteration_check(
    pb: &BottProblem,
    m: usize,
    steps_per_period: usize,
    opts: &MaslovOptions,
) -> Result<IdentityReport> {
    let n = pb.n;
    if m == 0 {
        return Err(Error::Spec("iteration count must be positive".into()));
    }
    if !is_symplectic(&pb.p, 1e-10)? {
        return Err(Error::Spec("P is not symplectic".into()));
    }
    let (p, bb, tau) = (pb.p.clone(), pb.b.clone(), pb.tau);
    check_b_relation(
        &pb.b,
        &sample_points(tau, 2.0 * tau, 8),
        1e-8,
        move |t, _| p.adjoint() * bb(t - tau) * &p,
        "B(t) = P* B(t − τ) P",
    )?;
    let omega = cis(2.0 * std::f64::consts::PI * pb.omega_turns);
    let mut pm = eye(2 * n);
    for _ in 0..m {
        pm = &pm * &pb.p;
    }
    let s = pm * (c(1.0) / omega);
    let sinv = inverse(&s).ok_or(Error::Singular { sigma_min: 0.0 })?;
    let pinv = inverse(&pb.p).ok_or(Error::Singular { sigma_min: 0.0 })?;
    let full_t = m as f64 * pb.tau;
    let gamma_full = flow_gamma(n, &pb.b, 0.0, full_t, steps_per_period * m)?;
    let lam = graph(&sinv, 1e-8)?;
    let lhs = maslov_vs_graph(&lam, n, 0.0, full_t, gamma_full, opts)
        .map_err(|e| Error::Resolution(format!("LHS μ(Gr(S⁻¹), Gr(γ)) on [0, mτ]: {e}")))?;
    let gamma = flow_gamma(n, &pb.b, 0.0, pb.tau, steps_per_period)?;
    let roots = roots_of(pb.omega_turns, m);
    let rhs: Vec<Result<(Term, String)>> = roots
        .par_iter()
        .map(|&w| {
            let lam = graph(&(&pinv * w), 1e-8)?;
            let label = format!("ω_i = {:.6}{:+.6}i", w.re, w.im);
            let r = maslov_vs_graph(&lam, n, 0.0, pb.tau, gamma.clone(), opts)
                .map_err(|e| Error::Resolution(format!("term {label}: {e}")))?;
            Ok((term(label.clone(), r.total), crossing_summary(&label, &r)))
        })
        .collect();
    let mut terms = Vec::new();
    let mut diags = vec![crossing_summary("LHS", &lhs)];
    for r in rhs {
        let (t, d) = r?;
        terms.push(t);
        diags.push(d);
    }
    let mut rep = IdentityReport::new("bott", lhs.total, terms);
    rep.diagnostics = diags;
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Brake symmetry

#[derive(Clone, Debug)]
pub enum BrakeBoundary {
    /// x(0) = S x(T)
    Graph { s: CMat },
    /// x(0) ∈ V0, x(T) ∈ V1
    Separated { v0: CMat, v1: CMat },
}

#[derive(Clone)]
pub struct BrakeProblem {
    pub n: usize,
    pub period: f64,
    pub b: MatFn,
    pub nmat: CMat,
    pub boundary: BrakeBoundary,
}

fn same_subspace(a: &CMat, b: &CMat) -> Result<bool> {
    let qa = orth(a, 1e-12);
    let qb = orth(b, 1e-12);
    Ok(qa.ncols() == qb.ncols() && subspace_intersection_dim(&qa, &qb, 1e-8)? == qa.ncols())
}

/// V^±(N) with Lagrangian certification.
pub fn brake_eigenspaces(nmat: &CMat) -> Result<(LagrangianFrame, LagrangianFrame)> {
    let d = nmat.nrows();
    if frob(&(nmat * nmat - eye(d))) > 1e-10 {
        return Err(Error::Spec("N² ≠ I".into()));
    }
    if !is_anti_symplectic(nmat, 1e-10)? {
        return Err(Error::Spec("N is not anti-symplectic".into()));
    }
    let vp = lagrangian_from_frame(&involution_eigenspace(nmat, 1.0), 1e-8)?;
    let vm = lagrangian_from_frame(&involution_eigenspace(nmat, -1.0), 1e-8)?;
    Ok((vp, vm))
}

fn validate_brake(pb: &BrakeProblem) -> Result<()> {
    let nm = pb.nmat.clone();
    let bb = pb.b.clone();
    let t = pb.period;
    check_b_relation(
        &pb.b,
        &sample_points(0.0, t, 9),
        1e-8,
        move |s, _| nm.adjoint() * bb(t - s) * &nm,
        "N* B(T − t) N = B(t)",
    )?;
    match &pb.boundary {
        BrakeBoundary::Graph { s } => {
            let sinv = inverse(s).ok_or(Error::Singular { sigma_min: 0.0 })?;
            if frob(&(&pb.nmat * &sinv - s * &pb.nmat)) > 1e-10 * frob(s).max(1.0) {
                return Err(Error::Equivariance("NS⁻¹ = SN violated".into()));
            }
        }
        BrakeBoundary::Separated { v0, v1 } => {
            if !same_subspace(&(&pb.nmat * v0), v1)? || !same_subspace(&(&pb.nmat * v1), v0)? {
                return Err(Error::Equivariance("NV₀ = V₁, NV₁ = V₀ violated".into()));
            }
        }
    }
    Ok(())
}

fn fixed_vs_moving(
    v: &LagrangianFrame,
    w: &CMat,
    a: f64,
    b: f64,
    gamma: Arc<dyn Fn(f64) -> CMat + Send + Sync>,
    opts: &MaslovOptions,
) -> Result<MaslovReport> {
    let n = v.ambient() / 2;
    let l1 = LagrangianPath::constant(v, j_matrix(n), a, b);
    let wf = w.clone();
    let l2 = LagrangianPath::new(a, b, j_matrix(n), Arc::new(move |t| gamma(t) * &wf));
    maslov_index(&l1, &l2, opts)
}

pub fn brake_symmetry_check(pb: &BrakeProblem, steps: usize, opts: &MaslovOptions) -> Result<IdentityReport> {
    let n = pb.n;
    let (vp, vm) = brake_eigenspaces(&pb.nmat)?;
    validate_brake(pb)?;
    let t = pb.period;
    let gamma = flow_gamma(n, &pb.b, 0.0, t, steps)?;
    let mut diags = Vec::new();
    let (lhs, starts) = match &pb.boundary {
        BrakeBoundary::Graph { s } => {
            let sinv = inverse(s).ok_or(Error::Singular { sigma_min: 0.0 })?;
            let r = maslov_vs_graph(&graph(&sinv, 1e-8)?, n, 0.0, t, gamma.clone(), opts)?;
            let sn = s * &pb.nmat;
            (r, [involution_eigenspace(&sn, 1.0), involution_eigenspace(&sn, -1.0)])
        }
        BrakeBoundary::Separated { v0, v1 } => {
            let v1f = lagrangian_from_frame(v1, 1e-8)?;
            let r = fixed_vs_moving(&v1f, v0, 0.0, t, gamma.clone(), opts)?;
            (r, [v0.clone(), v0.clone()])
        }
    };
    diags.push(crossing_summary("LHS", &lhs));
    let mut terms = Vec::new();
    for (label, v, w) in [("V+(N)", &vp, &starts[0]), ("V-(N)", &vm, &starts[1])] {
        if w.ncols() != n {
            return Err(Error::Spec(format!("{label}: start subspace has dimension {}", w.ncols())));
        }
        let r = fixed_vs_moving(v, w, 0.0, 0.5 * t, gamma.clone(), opts)?;
        diags.push(crossing_summary(label, &r));
        terms.push(term(label, r.total));
    }
    let mut rep = IdentityReport::new("brake", lhs.total, terms);
    rep.diagnostics = diags;
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Fundamental domains

#[derive(Clone, Debug)]
pub enum DomainSymmetry {
    /// (gx)(t) = P x(t + T/k), boundary x(0) = S x(T)
    Shift { k: usize, p: CMat, s: CMat },
    Brake { nmat: CMat, boundary: BrakeBoundary },
}

#[derive(Clone)]
pub struct IterationProblem {
    pub n: usize,
    pub period: f64,
    /// (s, t) ↦ B_s(t)
    pub b: FamilyFn,
    pub s0: f64,
    pub s1: f64,
    pub symmetry: DomainSymmetry,
}

impl IterationProblem {
    fn family(&self, t1: f64, lambda: CMat) -> HamiltonianFamily {
        HamiltonianFamily {
            n: self.n,
            t0: 0.0,
            t1,
            s0: self.s0,
            s1: self.s1,
            b: self.b.clone(),
            lambda: Arc::new(move |_| lambda.clone()),
        }
    }

    fn full_boundary(&self) -> Result<CMat> {
        match &self.symmetry {
            DomainSymmetry::Shift { s, .. } | DomainSymmetry::Brake { boundary: BrakeBoundary::Graph { s }, .. } => {
                let sinv = inverse(s).ok_or(Error::Singular { sigma_min: 0.0 })?;
                Ok(graph_frame(&sinv))
            }
            DomainSymmetry::Brake {
                boundary: BrakeBoundary::Separated { v0, v1 },
                ..
            } => Ok(separated(
                &lagrangian_from_frame(v0, 1e-8)?,
                &lagrangian_from_frame(v1, 1e-8)?,
                1e-8,
            )?
            .frame),
        }
    }
}

/// Reduced-domain description of one symmetry block.
struct Block {
    label: String,
    eigenvalue: C64,
    t1: f64,
    lambda: CMat,
}

fn domain_blocks(pb: &IterationProblem, g: &CMat) -> Result<Vec<Block>> {
    let n = pb.n;
    match &pb.symmetry {
        DomainSymmetry::Shift { k, p, .. } => {
            let mut gk = eye(g.nrows());
            for _ in 0..*k {
                gk = &gk * g;
            }
            let omega = gk.trace() / c(g.nrows() as f64);
            let res = frob(&(&gk - eye(g.nrows()) * omega));
            if res > 1e-8 * (g.nrows() as f64).sqrt() || (omega.norm() - 1.0).abs() > 1e-8 {
                return Err(Error::Spec(format!("g^k is not ωI on the discretization (residual {res:.3e})")));
            }
            let theta = omega.arg() / (2.0 * std::f64::consts::PI);
            let pinv = inverse(p).ok_or(Error::Singular { sigma_min: 0.0 })?;
            roots_of(theta, *k)
                .into_iter()
                .map(|w| {
                    // H_w: P x(t + T/k) = w x(t), i.e. x(0) = w⁻¹ P x(T/k), Λ = Gr(w P⁻¹)
                    Ok(Block {
                        label: format!("λ = {:.6}{:+.6}i", w.re, w.im),
                        eigenvalue: w,
                        t1: pb.period / *k as f64,
                        lambda: graph_frame(&(&pinv * w)),
                    })
                })
                .collect()
        }
        DomainSymmetry::Brake { nmat, boundary } => {
            let (vp, vm) = brake_eigenspaces(nmat)?;
            let starts = match boundary {
                BrakeBoundary::Graph { s } => {
                    let sn = s * nmat;
                    [involution_eigenspace(&sn, 1.0), involution_eigenspace(&sn, -1.0)]
                }
                BrakeBoundary::Separated { v0, .. } => [v0.clone(), v0.clone()],
            };
            let mut out = Vec::new();
            for (sign, v, w) in [(1.0, &vp, &starts[0]), (-1.0, &vm, &starts[1])] {
                let w = lagrangian_from_frame(w, 1e-8)?;
                let lam = separated(&w, v, 1e-8)?;
                out.push(Block {
                    label: if sign > 0.0 { "H+".into() } else { "H-".into() },
                    eigenvalue: c(sign),
                    t1: 0.5 * pb.period,
                    lambda: lam.frame,
                });
            }
            let _ = n;
            Ok(out)
        }
    }
}

/// Block spectral flows by compression against re-discretized fundamental-domain problems.
pub fn fundamental_domain_check(pb: &IterationProblem, grid: &SemGrid, opts: &SfOptions) -> Result<IdentityReport> {
    let lam = pb.full_boundary()?;
    doubled_lagrangian(&lam, 1e-8)?;
    let fam = pb.family(pb.period, lam);
    let theta = fam.gauge(grid)?;
    let (path, op0) = fam.pencil_path(grid, theta)?;
    let spec = match &pb.symmetry {
        DomainSymmetry::Shift { k, p, s } => SymmetrySpec::ZkShift {
            k: *k,
            p: p.clone(),
            s: s.clone(),
        },
        DomainSymmetry::Brake { nmat, .. } => SymmetrySpec::Brake { n: nmat.clone() },
    };
    if let DomainSymmetry::Brake { .. } = &pb.symmetry {
        let bb = pb.b.clone();
        let DomainSymmetry::Brake { nmat, .. } = &pb.symmetry else { unreachable!() };
        let nm = nmat.clone();
        let t = pb.period;
        for s in [pb.s0, 0.5 * (pb.s0 + pb.s1), pb.s1] {
            let bs: MatFn = {
                let bb = bb.clone();
                Arc::new(move |x| bb(s, x))
            };
            let bs2 = bs.clone();
            let nm2 = nm.clone();
            check_b_relation(
                &bs,
                &sample_points(0.0, t, 9),
                1e-8,
                move |x, _| nm2.adjoint() * bs2(t - x) * &nm2,
                "N* B(T − t) N = B(t)",
            )?;
        }
    }
    let sym = build_symmetry(&spec, &op0)?;
    let (ok, eq) = check_equivariance(&sym.g, &path, 9, 1e-8)?;
    if !ok {
        return Err(Error::Equivariance(format!("g*A(s)g ≠ A(s), residual {eq:.3e}")));
    }
    let blocks = domain_blocks(pb, &sym.g)?;
    let dim = sym.g.nrows();
    let bases: Vec<CMat> = blocks
        .iter()
        .map(|b| null_space(&(&sym.g - eye(dim) * b.eigenvalue), 1e-8))
        .collect();
    let total_dim: usize = bases.iter().map(|b| b.ncols()).sum();
    if total_dim != dim {
        return Err(Error::Fidelity(format!(
            "eigenspaces of g span {total_dim} of {dim} dimensions"
        )));
    }
    let direct = spectral_flow(&path, opts)?;
    let results: Vec<Result<(SfReport, SfReport)>> = blocks
        .par_iter()
        .zip(bases.par_iter())
        .map(|(b, w)| {
            let amb = spectral_flow(&compress(&path, w)?, opts)?;
            let red_fam = pb.family(b.t1, b.lambda.clone());
            let red = red_fam.spectral_flow(grid, opts)?;
            Ok((amb, red))
        })
        .collect();
    let mut terms = Vec::new();
    let mut checks = Vec::new();
    let mut diags = vec![format!("gauge θ = {theta:.4}, equivariance residual {eq:.3e}")];
    for (b, r) in blocks.iter().zip(results) {
        let (amb, red) = r?;
        if amb.kernel_a != red.kernel_a || amb.kernel_b != red.kernel_b {
            return Err(Error::Fidelity(format!(
                "{}: kernel dimensions ({}, {}) on the block vs ({}, {}) on the fundamental domain",
                b.label, amb.kernel_a, amb.kernel_b, red.kernel_a, red.kernel_b
            )));
        }
        diags.push(format!(
            "{}: block sf {} (dim {}), fundamental-domain sf {}",
            b.label,
            amb.sf,
            bases[terms.len()].ncols(),
            red.sf
        ));
        checks.push(BlockCheck {
            label: b.label.clone(),
            ambient: amb.sf,
            reduced: red.sf,
        });
        terms.push(term(b.label.clone(), red.sf));
    }
    let mut rep = IdentityReport::new("fundamental-domain", direct.sf, terms);
    rep.checks = checks;
    rep.diagnostics = diags;
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Heteroclinic and homoclinic brake decompositions on ℝ

/// λ ↦ B_λ(t) on ℝ with limits B_λ(±∞).
#[derive(Clone)]
pub struct LineFamily {
    pub n: usize,
    pub b: FamilyFn,
    pub b_minus: Arc<dyn Fn(f64) -> CMat + Send + Sync>,
    pub b_plus: Arc<dyn Fn(f64) -> CMat + Send + Sync>,
}

impl LineFamily {
    fn at(&self, lam: f64) -> MatFn {
        let b = self.b.clone();
        Arc::new(move |t| b(lam, t))
    }

    pub fn unstable_path(&self, l: f64, steps: usize) -> LagrangianPath {
        let me = self.clone();
        LagrangianPath::new(
            0.0,
            1.0,
            j_matrix(self.n),
            Arc::new(move |lam| {
                unstable_at_zero(me.n, &me.at(lam), &(me.b_minus)(lam), l, steps).expect("hyperbolic end")
            }),
        )
    }

    pub fn stable_path(&self, l: f64, steps: usize) -> LagrangianPath {
        let me = self.clone();
        LagrangianPath::new(
            0.0,
            1.0,
            j_matrix(self.n),
            Arc::new(move |lam| stable_at_zero(me.n, &me.at(lam), &(me.b_plus)(lam), l, steps).expect("hyperbolic end")),
        )
    }

    fn validate(&self, nmat: &CMat) -> Result<()> {
        for k in 0..=8 {
            let lam = k as f64 / 8.0;
            for end in [(self.b_minus)(lam), (self.b_plus)(lam)] {
                let (ok, gap) = hyperbolicity_check(&end, 1e-8)?;
                if !ok {
                    return Err(Error::Hyperbolicity(format!("λ = {lam}: gap {gap:.3e}")));
                }
            }
            let b = self.at(lam);
            let b2 = b.clone();
            let nm = nmat.clone();
            check_b_relation(
                &b,
                &sample_points(-4.0, 4.0, 9),
                1e-8,
                move |t, _| nm.adjoint() * b2(-t) * &nm,
                "N* B(−t) N = B(t)",
            )?;
        }
        Ok(())
    }

    /// Truncated full-line operator with x(−L) ∈ V^u(B(−∞)), x(L) ∈ V^s(B(+∞)).
    pub fn truncated(&self, l: f64) -> Result<HamiltonianFamily> {
        let (bm, bp) = ((self.b_minus)(0.0), (self.b_plus)(0.0));
        for lam in [0.25, 0.5, 0.75, 1.0] {
            if frob(&((self.b_minus)(lam) - &bm)) + frob(&((self.b_plus)(lam) - &bp)) > 1e-12 {
                return Err(Error::Boundary("truncated operator needs λ-independent limits".into()));
            }
        }
        let vu = spectral_subspace(&bm, true)?;
        let vs = spectral_subspace(&bp, false)?;
        let lam = separated(&vu, &vs, 1e-8)?.frame;
        Ok(HamiltonianFamily {
            n: self.n,
            t0: -l,
            t1: l,
            s0: 0.0,
            s1: 1.0,
            b: self.b.clone(),
            lambda: Arc::new(move |_| lam.clone()),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HeteroclinicReport {
    /// ℝ⁻ fundamental domain: μ(V^s, V^u) = Σ± μ(V^±(N), V^u)
    pub minus_side: IdentityReport,
    /// ℝ⁺ fundamental domain: μ(V^s, V^u) = Σ± μ(V^s, V^±(N))
    pub plus_side: IdentityReport,
    pub l: f64,
}

fn heteroclinic_indices(
    fam: &LineFamily,
    vp: &LagrangianFrame,
    vm: &LagrangianFrame,
    l: f64,
    steps: usize,
    opts: &MaslovOptions,
) -> Result<[i64; 5]> {
    let vu = fam.unstable_path(l, steps);
    let vs = fam.stable_path(l, steps);
    let j = j_matrix(fam.n);
    let cp = LagrangianPath::constant(vp, j.clone(), 0.0, 1.0);
    let cm = LagrangianPath::constant(vm, j, 0.0, 1.0);
    let pairs: Vec<(&LagrangianPath, &LagrangianPath)> = vec![(&vs, &vu), (&cp, &vu), (&cm, &vu), (&vs, &cp), (&vs, &cm)];
    let r: Vec<Result<i64>> = pairs.par_iter().map(|(a, b)| Ok(maslov_index(a, b, opts)?.total)).collect();
    let mut out = [0i64; 5];
    for (o, v) in out.iter_mut().zip(r) {
        *o = v?;
    }
    Ok(out)
}

pub fn heteroclinic_brake_check(
    fam: &LineFamily,
    nmat: &CMat,
    l: f64,
    steps: usize,
    opts: &MaslovOptions,
) -> Result<HeteroclinicReport> {
    let (vp, vm) = brake_eigenspaces(nmat)?;
    fam.validate(nmat)?;
    let a = heteroclinic_indices(fam, &vp, &vm, l, steps, opts)?;
    let l2 = 1.5 * l;
    let steps2 = (steps as f64 * 1.5).ceil() as usize;
    let b = heteroclinic_indices(fam, &vp, &vm, l2, steps2, opts)?;
    for k in 0..5 {
        if a[k] != b[k] {
            return Err(Error::Truncation {
                at_l: a[k],
                at_1_5l: b[k],
            });
        }
    }
    let mut minus = IdentityReport::new(
        "heteroclinic-brake (ℝ⁻)",
        a[0],
        vec![term("μ(V+(N), V^u)", a[1]), term("μ(V-(N), V^u)", a[2])],
    );
    minus.diagnostics.push(format!("stable under L = {l} → {l2}"));
    let mut plus = IdentityReport::new(
        "heteroclinic-brake (ℝ⁺)",
        a[0],
        vec![term("μ(V^s, V+(N))", a[3]), term("μ(V^s, V-(N))", a[4])],
    );
    plus.diagnostics.push(format!("stable under L = {l} → {l2}"));
    Ok(HeteroclinicReport {
        minus_side: minus,
        plus_side: plus,
        l,
    })
}

/// (−sf of the truncated discretized family, μ(V^s_λ(0), V^u_λ(0); λ ∈ [0, 1])).
pub fn heteroclinic_sf_consistency(
    fam: &LineFamily,
    l: f64,
    grid: &SemGrid,
    steps: usize,
    opts: &MaslovOptions,
    sf_opts: &SfOptions,
) -> Result<(i64, i64)> {
    let disc = fam.truncated(l)?;
    let sf = disc.spectral_flow(grid, sf_opts)?.sf;
    let mu = maslov_index(&fam.stable_path(l, steps), &fam.unstable_path(l, steps), opts)?.total;
    Ok((-sf, mu))
}

/// I(A − B*, A − B) = I₊ + I₋ over the brake eigenspaces of the truncated discretization.
pub fn homoclinic_index_decomposition(
    n: usize,
    b: MatFn,
    b_star: &CMat,
    nmat: &CMat,
    l: f64,
    grid: &SemGrid,
    opts: &SfOptions,
) -> Result<IdentityReport> {
    brake_eigenspaces(nmat)?;
    let bs = b_star.clone();
    let bb = b.clone();
    let fam = LineFamily {
        n,
        b: Arc::new(move |s, t| &bs + (bb(t) - &bs) * c(s)),
        b_minus: {
            let m = b_star.clone();
            Arc::new(move |_| m.clone())
        },
        b_plus: {
            let m = b_star.clone();
            Arc::new(move |_| m.clone())
        },
    };
    let nm = nmat.clone();
    let b2 = b.clone();
    check_b_relation(
        &b,
        &sample_points(-l, l, 11),
        1e-8,
        move |t, _| nm.adjoint() * b2(-t) * &nm,
        "N* B(−t) N = B(t)",
    )?;
    let disc = fam.truncated(l)?;
    let theta = disc.gauge(grid)?;
    let (path, op0) = disc.pencil_path(grid, theta)?;
    let sym = build_symmetry(&SymmetrySpec::HeteroclinicBrake { n: nmat.clone() }, &op0)?;
    let (ok, eq) = check_equivariance(&sym.g, &path, 9, 1e-8)?;
    if !ok {
        return Err(Error::Equivariance(format!("g*A(s)g ≠ A(s), residual {eq:.3e}")));
    }
    let wp = involution_eigenspace(&sym.g, 1.0);
    let wm = involution_eigenspace(&sym.g, -1.0);
    if wp.ncols() + wm.ncols() != sym.g.nrows() {
        return Err(Error::Equivariance("discrete brake action is not an involution".into()));
    }
    let (full, (plus, minus)) = rayon::join(
        || spectral_flow(&path, opts),
        || {
            rayon::join(
                || spectral_flow(&compress(&path, &wp)?, opts),
                || spectral_flow(&compress(&path, &wm)?, opts),
            )
        },
    );
    let mut rep = IdentityReport::new(
        "homoclinic",
        -full?.sf,
        vec![term("I on H+", -plus?.sf), term("I on H-", -minus?.sf)],
    );
    rep.diagnostics.push(format!(
        "L = {l}, gauge θ = {theta:.4}, dim H+ = {}, dim H- = {}, equivariance residual {eq:.3e}",
        wp.ncols(),
        wm.ncols()
    ));
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Sturm–Liouville: geodesic iteration and Morse-index decomposition

#[derive(Clone)]
pub struct GeodesicProblem {
    pub k: usize,
    pub period: f64,
    pub g: CMat,
    pub r: MatFn,
    pub p: CMat,
    pub omega_turns: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralIndex {
    pub index: i64,
    pub s_max: f64,
}

/// sf(−G d²/dt² + R + sG; s ∈ [0, s_max]) on [0, t1] with u(0) = twist·P u(t1).
///
/// s_max is doubled until the endpoint is kernel-free with the limiting negative count n⁻(G).
pub fn spectral_index(
    k: usize,
    t1: f64,
    g: &CMat,
    r: &MatFn,
    twist: C64,
    p: &CMat,
    grid: &SemGrid,
    s_start: f64,
    opts: &SfOptions,
) -> Result<SpectralIndex> {
    let bnd = SlBoundary::Twisted {
        omega: twist,
        p: p.clone(),
    };
    let gm = g.clone();
    let rr = r.clone();
    let g2 = g.clone();
    let path_to = |smax: f64| {
        let (gm, rr, g2, bnd) = (gm.clone(), rr.clone(), g2.clone(), bnd.clone());
        let grid = *grid;
        HermitianPath::fallible(
            0.0,
            smax,
            Arc::new(move |s| {
                let gs = gm.clone();
                let rs = rr.clone();
                let g3 = g2.clone();
                let op = discretize_sturm_liouville(
                    k,
                    0.0,
                    t1,
                    &move |_| gs.clone(),
                    &move |t| rs(t) + &g3 * c(s),
                    &bnd,
                    &grid,
                )?;
                op.reduced()
            }),
        )
    };
    // K(s) = K + sD with D = K(1) − K(0) invertible, so the negative count tends to n⁻(D)
    let disc = |s: f64| {
        let (gs, rs, g3) = (gm.clone(), rr.clone(), g2.clone());
        discretize_sturm_liouville(k, 0.0, t1, &move |_| gs.clone(), &move |t| rs(t) + &g3 * c(s), &bnd, grid)
    };
    let d = disc(1.0)?.k - disc(0.0)?.k;
    let dev = herm_eigvals(&d);
    let dnorm = dev.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if dev.iter().any(|v| v.abs() <= 1e-10 * dnorm) {
        return Err(Error::Coefficient("discretized G is singular".into()));
    }
    let n_inf = dev.iter().filter(|&&v| v < 0.0).count();
    let mut smax = s_start.max(1e-3);
    for _ in 0..40 {
        let rep = spectral_flow(&path_to(smax), opts)?;
        if rep.kernel_b == 0 && rep.below_b == n_inf {
            return Ok(SpectralIndex {
                index: rep.sf,
                s_max: smax,
            });
        }
        smax *= 2.0;
    }
    Err(Error::Stabilization(format!("sf did not stabilize up to s_max = {smax}")))
}

pub fn geodesic_iteration_check(
    pb: &GeodesicProblem,
    m: usize,
    s_start: f64,
    grid: &SemGrid,
    opts: &SfOptions,
) -> Result<IdentityReport> {
    let k = pb.k;
    if frob(&(pb.p.adjoint() * &pb.g * &pb.p - &pb.g)) > 1e-10 * frob(&pb.g).max(1.0) {
        return Err(Error::Spec("PᵀGP ≠ G".into()));
    }
    let sv = singular_values(&pb.g);
    if sv.last().copied().unwrap_or(0.0) <= 1e-12 * sv[0] {
        return Err(Error::Coefficient("G is singular".into()));
    }
    let omega = cis(2.0 * std::f64::consts::PI * pb.omega_turns);
    let mut pm = eye(k);
    for _ in 0..m {
        pm = &pm * &pb.p;
    }
    let big = SemGrid {
        elements: grid.elements * m,
        degree: grid.degree,
    };
    let roots = roots_of(pb.omega_turns, m);
    let (lhs, rhs) = rayon::join(
        || spectral_index(k, m as f64 * pb.period, &pb.g, &pb.r, omega, &pm, &big, s_start, opts),
        || {
            roots
                .par_iter()
                .map(|&w| spectral_index(k, pb.period, &pb.g, &pb.r, w, &pb.p, grid, s_start, opts).map(|r| (w, r)))
                .collect::<Result<Vec<_>>>()
        },
    );
    let lhs = lhs?;
    let mut terms = Vec::new();
    let mut diags = vec![format!("LHS s_max = {}", lhs.s_max)];
    for (w, r) in rhs? {
        let label = format!("ω_j = {:.6}{:+.6}i", w.re, w.im);
        diags.push(format!("{label}: s_max = {}", r.s_max));
        terms.push(term(label, r.index));
    }
    let mut rep = IdentityReport::new("geodesic", lhs.index, terms);
    rep.diagnostics = diags;
    Ok(rep)
}

/// m⁻(A) = m⁻(A|H₊) + m⁻(A|H₋) for −(G u′)′ + R u on [−L, L] with Dirichlet ends.
pub fn morse_index_decomposition(
    k: usize,
    l: f64,
    g: MatFn,
    r: MatFn,
    nmat: &CMat,
    grid: &SemGrid,
    rel_ktol: f64,
) -> Result<IdentityReport> {
    if frob(&(nmat * nmat - eye(k))) > 1e-10 {
        return Err(Error::Spec("N² ≠ I".into()));
    }
    for (what, f) in [("G", &g), ("R", &r)] {
        let f2 = f.clone();
        let nm = nmat.clone();
        check_b_relation(
            f,
            &sample_points(-l, l, 11),
            1e-8,
            move |t, _| nm.adjoint() * f2(-t) * &nm,
            &format!("N* {what}(−t) N = {what}(t)"),
        )?;
    }
    let (gg, rr) = (g.clone(), r.clone());
    let op = discretize_sturm_liouville(k, -l, l, &move |t| gg(t), &move |t| rr(t), &SlBoundary::Dirichlet, grid)?;
    let sym = build_symmetry(&SymmetrySpec::HeteroclinicBrake { n: nmat.clone() }, &op)?;
    let kc = op.k.clone();
    let path = HermitianPath::constant(0.0, 1.0, kc).with_mass(op.mass.clone());
    let (ok, eq) = check_equivariance(&sym.g, &path, 1, 1e-8)?;
    if !ok {
        return Err(Error::Equivariance(format!("g*Ag ≠ A, residual {eq:.3e}")));
    }
    let wp = involution_eigenspace(&sym.g, 1.0);
    let wm = involution_eigenspace(&sym.g, -1.0);
    if wp.ncols() + wm.ncols() != sym.g.nrows() {
        return Err(Error::Equivariance("discrete reflection is not an involution".into()));
    }
    let count = |p: &HermitianPath| -> Result<i64> {
        let a = p.matrix(0.0)?;
        Ok(morse_index(&a, rel_ktol * op_norm(&a)) as i64)
    };
    let full = count(&path)?;
    let plus = count(&compress(&path, &wp)?)?;
    let minus = count(&compress(&path, &wm)?)?;
    let mut rep = IdentityReport::new("morse", full, vec![term("m⁻ on H+", plus), term("m⁻ on H-", minus)]);
    rep.diagnostics.push(format!(
        "dim H+ = {}, dim H- = {}, equivariance residual {eq:.3e}",
        wp.ncols(),
        wm.ncols()
    ));
    Ok(rep)
}
