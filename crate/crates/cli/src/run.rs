//! Dispatch of resolved problems to the computation modules.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use maslov_core::flow::{propagator, MatFn};
use maslov_core::iteration::*;
use maslov_core::linalg::{c, inverse};
use maslov_core::maslov::{maslov_vs_graph, MaslovOptions};
use maslov_core::spectral::{spectral_flow, HamiltonianFamily, HermitianPath, SemGrid, SfOptions, SfReport};
use maslov_core::suites::{maslov_axiom_suites, sf_axiom_suites, SuiteOutcome};
use maslov_core::symmetry::decompose_spectral_flow;
use maslov_core::symplectic::{doubled_lagrangian, graph_frame, lagrangian_from_frame, separated};
use maslov_core::{CMat, Error};
use serde::Serialize;
use serde_json::{json, Value};

use crate::problem::{omega, Boundary, Kind, ProblemFile, Resolved, Symmetry, ValidationError};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certification {
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_stable: Option<bool>,
    pub tolerances: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub s: f64,
    /// the eigenvalues of smallest modulus, ascending
    pub eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub kind: &'static str,
    pub inputs: ProblemFile,
    pub defaults: Vec<String>,
    pub result: Value,
    pub certification: Certification,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("validation error at {}: {}", .0.path, .0.message)]
    Validation(ValidationError),
    #[error("{0}")]
    Compute(#[from] Error),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl From<ValidationError> for RunError {
    fn from(e: ValidationError) -> Self {
        RunError::Validation(e)
    }
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Validation(_) => 2,
            RunError::Compute(_) | RunError::Io { .. } => 1,
        }
    }

    pub fn diagnostic(&self) -> Value {
        match self {
            RunError::Validation(e) => json!({"error": {"class": "validation", "path": e.path, "message": e.message}}),
            RunError::Compute(e) => json!({"error": {"class": "computation", "kind": error_kind(e), "message": e.to_string()}}),
            RunError::Io { path, message } => json!({"error": {"class": "io", "path": path, "message": message}}),
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Dimension(_) => "dimension",
        Error::DegenerateFrame { .. } => "degenerate-frame",
        Error::NotLagrangian { .. } => "not-lagrangian",
        Error::Singular { .. } => "singular",
        Error::Clustering { .. } => "clustering",
        Error::Pairing { .. } => "pairing",
        Error::Coefficient(_) => "coefficient",
        Error::Boundary(_) => "boundary",
        Error::DegenerateCrossing { .. } => "degenerate-crossing",
        Error::Resolution(_) => "resolution",
        Error::Tolerance(_) => "tolerance",
        Error::Grid(_) => "grid",
        Error::Equivariance(_) => "equivariance",
        Error::TheoremViolation(_) => "theorem-violation",
        Error::Fidelity(_) => "fidelity",
        Error::Stabilization(_) => "stabilization",
        Error::Truncation { .. } => "truncation",
        Error::Spec(_) => "symmetry-spec",
        Error::Hyperbolicity(_) => "hyperbolicity",
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// force an eigenvalue sweep with this many samples
    pub trace: Option<usize>,
    pub timing: bool,
}

struct Outcome {
    result: Value,
    cert: Certification,
    trace: Option<Vec<TraceRow>>,
}

fn cert(passed: bool) -> Certification {
    Certification {
        passed,
        residual: None,
        grid_stable: None,
        tolerances: BTreeMap::new(),
        notes: Vec::new(),
    }
}

pub fn run(resolved: &Resolved, opts: &RunOptions) -> Result<Report, RunError> {
    let start = Instant::now();
    let p = &resolved.problem;
    if opts.trace.is_some() && !matches!(p.kind, Kind::Sf | Kind::Maslov) {
        return Err(ValidationError::new("kind", format!("no eigenvalue trace for kind {}", p.kind.name())).into());
    }
    let out = match p.kind {
        Kind::Sf if p.coefficients.contains_key("A") => run_sf_matrix(p, opts)?,
        Kind::Sf => run_sf_operator(p, opts)?,
        Kind::Maslov => run_maslov(p, opts)?,
        Kind::Decompose if p.coefficients.contains_key("A") => run_decompose_matrix(p)?,
        Kind::Decompose => run_decompose_operator(p)?,
        Kind::Bott => run_bott(p)?,
        Kind::Brake => run_brake(p)?,
        Kind::Heteroclinic => run_heteroclinic(p)?,
        Kind::Homoclinic => run_homoclinic(p)?,
        Kind::Geodesic => run_geodesic(p)?,
        Kind::VerifyAxioms => run_axioms(p),
    };
    Ok(Report {
        kind: p.kind.name(),
        inputs: p.clone(),
        defaults: resolved.defaults.clone(),
        result: out.result,
        certification: out.cert,
        trace: out.trace,
        wall_time_seconds: opts.timing.then(|| start.elapsed().as_secs_f64()),
    })
}

fn coef(p: &ProblemFile, name: &str, d: usize) -> Option<MatFn> {
    p.coefficients.get(name).map(|c| c.to_fn(d))
}

fn grid(p: &ProblemFile) -> SemGrid {
    SemGrid {
        elements: p.numerics.elements.unwrap(),
        degree: p.numerics.degree.unwrap(),
    }
}

fn sf_options(p: &ProblemFile, trace: usize) -> SfOptions {
    SfOptions {
        rel_ktol: p.numerics.rel_ktol.unwrap(),
        trace,
        ..SfOptions::default()
    }
}

fn maslov_options(p: &ProblemFile) -> MaslovOptions {
    MaslovOptions {
        grid: p.numerics.scan_points.unwrap(),
        ..MaslovOptions::default()
    }
}

fn trace_samples(p: &ProblemFile, opts: &RunOptions) -> usize {
    opts.trace.unwrap_or(p.numerics.trace_samples.unwrap_or(0))
}

/// Keep the `width` eigenvalues closest to zero at every sample.
fn trim_trace(rep: &SfReport, width: usize) -> Option<Vec<TraceRow>> {
    if rep.trace.is_empty() {
        return None;
    }
    Some(
        rep.trace
            .iter()
            .map(|t| {
                let mut ev = t.eigenvalues.clone();
                ev.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
                ev.truncate(width);
                ev.sort_by(f64::total_cmp);
                TraceRow { s: t.s, eigenvalues: ev }
            })
            .collect(),
    )
}

fn sf_json(rep: &SfReport) -> Value {
    json!({
        "sf": rep.sf,
        "kernel_a": rep.kernel_a,
        "kernel_b": rep.kernel_b,
        "below_a": rep.below_a,
        "below_b": rep.below_b,
    })
}

fn sf_tolerances(c: &mut Certification, rep: &SfReport) {
    c.tolerances.insert("ktol".into(), rep.ktol);
    c.tolerances.insert("epsilon".into(), rep.epsilon);
}

/// Frame of Λ ⊂ ℂ^{4n} for x(t0) = S x(t1), x(t0) = ωP x(t1) or separated conditions.
fn boundary_frame(b: &Boundary, n: usize) -> Result<CMat, Error> {
    let graph_inv = |s: CMat| -> Result<CMat, Error> {
        let sinv = inverse(&s).ok_or(Error::Singular { sigma_min: 0.0 })?;
        Ok(graph_frame(&sinv))
    };
    let frame = match b {
        Boundary::Graph { s } => graph_inv(s.to_cmat())?,
        Boundary::Twisted { omega_turns, p } => graph_inv(p.to_cmat() * omega(*omega_turns))?,
        Boundary::Separated { v0, v1 } => {
            separated(&lagrangian_from_frame(&v0.to_cmat(), 1e-8)?, &lagrangian_from_frame(&v1.to_cmat(), 1e-8)?, 1e-8)?
                .frame
        }
        Boundary::HyperbolicEnds { .. } => {
            return Err(Error::Boundary("hyperbolic ends do not define a two-point condition".into()))
        }
    };
    if frame.nrows() != 4 * n {
        return Err(Error::Dimension(format!("boundary frame has {} rows, expected {}", frame.nrows(), 4 * n)));
    }
    doubled_lagrangian(&frame, 1e-8)?;
    Ok(frame)
}

/// (s, t) ↦ B0(t) + s·B(t)
fn family_fn(p: &ProblemFile) -> Arc<dyn Fn(f64, f64) -> CMat + Send + Sync> {
    let d = 2 * p.n;
    let b = coef(p, "B", d).unwrap();
    match coef(p, "B0", d) {
        Some(b0) => Arc::new(move |s, t| b0(t) + b(t) * c(s)),
        None => Arc::new(move |s, t| b(t) * c(s)),
    }
}

fn operator_family(p: &ProblemFile) -> Result<HamiltonianFamily, Error> {
    let lam = boundary_frame(p.boundary.as_ref().unwrap(), p.n)?;
    let [t0, t1] = p.interval.unwrap();
    let [s0, s1] = p.numerics.s_range.unwrap();
    Ok(HamiltonianFamily {
        n: p.n,
        t0,
        t1,
        s0,
        s1,
        b: family_fn(p),
        lambda: Arc::new(move |_| lam.clone()),
    })
}

fn run_sf_operator(p: &ProblemFile, opts: &RunOptions) -> Result<Outcome, RunError> {
    let fam = operator_family(p)?;
    let g = grid(p);
    let (a, b) = rayon::join(
        || fam.spectral_flow(&g, &sf_options(p, trace_samples(p, opts))),
        || fam.spectral_flow(&g.refined(), &sf_options(p, 0)),
    );
    let (a, b) = (a?, b?);
    let mut result = sf_json(&a);
    result["sf_refined"] = json!(b.sf);
    let mut c = cert(a.sf == b.sf);
    c.grid_stable = Some(a.sf == b.sf);
    sf_tolerances(&mut c, &a);
    c.notes.push(format!("refined grid: {} elements of degree {}", g.refined().elements, g.degree));
    Ok(Outcome {
        result,
        cert: c,
        trace: trim_trace(&a, 2 * p.n),
    })
}

fn run_sf_matrix(p: &ProblemFile, opts: &RunOptions) -> Result<Outcome, RunError> {
    let [s0, s1] = p.numerics.s_range.unwrap();
    let a = coef(p, "A", p.n).unwrap();
    let mut path = HermitianPath::new(s0, s1, move |s| a(s));
    if let Some(m) = coef(p, "mass", p.n) {
        path = path.with_mass(m(s0));
    }
    let rep = spectral_flow(&path, &sf_options(p, trace_samples(p, opts)))?;
    let mut c = cert(true);
    sf_tolerances(&mut c, &rep);
    Ok(Outcome {
        result: sf_json(&rep),
        cert: c,
        trace: trim_trace(&rep, p.n),
    })
}

fn run_maslov(p: &ProblemFile, opts: &RunOptions) -> Result<Outcome, RunError> {
    let fam = operator_family(p)?;
    let lam = doubled_lagrangian(&boundary_frame(p.boundary.as_ref().unwrap(), p.n)?, 1e-8)?;
    let (n, [t0, t1], [s0, s1]) = (p.n, p.interval.unwrap(), p.numerics.s_range.unwrap());
    let steps = p.numerics.steps.unwrap();
    let bf = family_fn(p);
    let gamma: Arc<dyn Fn(f64) -> CMat + Send + Sync> = Arc::new(move |s| {
        let bf = bf.clone();
        let bs: MatFn = Arc::new(move |t| bf(s, t));
        propagator(n, &bs, t0, t1, steps)
    });
    let g = grid(p);
    let mopts = maslov_options(p);
    let (mu, (a, b)) = rayon::join(
        || maslov_vs_graph(&lam, n, s0, s1, gamma, &mopts),
        || {
            rayon::join(
                || fam.spectral_flow(&g, &sf_options(p, trace_samples(p, opts))),
                || fam.spectral_flow(&g.refined(), &sf_options(p, 0)),
            )
        },
    );
    let (mu, a, b) = (mu?, a?, b?);
    let residual = mu.total + a.sf;
    let result = json!({
        "mu": mu.total,
        "minus_sf": -a.sf,
        "minus_sf_refined": -b.sf,
        "crossings": mu.crossings,
    });
    let mut c = cert(residual == 0 && a.sf == b.sf);
    c.residual = Some(residual);
    c.grid_stable = Some(a.sf == b.sf);
    sf_tolerances(&mut c, &a);
    c.tolerances.insert("crossing_regularity".into(), mu.regularity);
    Ok(Outcome {
        result,
        cert: c,
        trace: trim_trace(&a, 2 * p.n),
    })
}

fn identity_outcome(rep: &IdentityReport) -> Outcome {
    let mut c = cert(rep.holds());
    c.residual = Some(rep.residual);
    c.notes = rep.diagnostics.clone();
    Outcome {
        result: serde_json::to_value(rep).expect("identity report serializes"),
        cert: c,
        trace: None,
    }
}

fn run_decompose_matrix(p: &ProblemFile) -> Result<Outcome, RunError> {
    let [s0, s1] = p.numerics.s_range.unwrap();
    let a = coef(p, "A", p.n).unwrap();
    let mut path = HermitianPath::new(s0, s1, move |s| a(s));
    if let Some(m) = coef(p, "mass", p.n) {
        path = path.with_mass(m(s0));
    }
    let Some(Symmetry::Matrix { g }) = &p.symmetry else { unreachable!() };
    let rep = decompose_spectral_flow(&path, &g.to_cmat(), 1e-8, &sf_options(p, 0))?;
    let mut c = cert(rep.residual == 0);
    c.residual = Some(rep.residual);
    c.tolerances.insert("equivariance_residual".into(), rep.equivariance_residual);
    Ok(Outcome {
        result: serde_json::to_value(&rep).expect("decomposition report serializes"),
        cert: c,
        trace: None,
    })
}

fn run_decompose_operator(p: &ProblemFile) -> Result<Outcome, RunError> {
    let boundary = p.boundary.as_ref().unwrap();
    let symmetry = match p.symmetry.as_ref().unwrap() {
        Symmetry::Shift { k, p: pm } => {
            let s = match boundary {
                Boundary::Graph { s } => s.to_cmat(),
                Boundary::Twisted { omega_turns, p } => p.to_cmat() * omega(*omega_turns),
                _ => unreachable!(),
            };
            DomainSymmetry::Shift {
                k: *k,
                p: pm.to_cmat(),
                s,
            }
        }
        Symmetry::Brake { n } => DomainSymmetry::Brake {
            nmat: n.to_cmat(),
            boundary: brake_boundary(boundary),
        },
        Symmetry::Matrix { .. } => unreachable!(),
    };
    let [s0, s1] = p.numerics.s_range.unwrap();
    let pb = IterationProblem {
        n: p.n,
        period: p.interval.unwrap()[1],
        b: family_fn(p),
        s0,
        s1,
        symmetry,
    };
    Ok(identity_outcome(&fundamental_domain_check(&pb, &grid(p), &sf_options(p, 0))?))
}

fn brake_boundary(b: &Boundary) -> BrakeBoundary {
    match b {
        Boundary::Graph { s } => BrakeBoundary::Graph { s: s.to_cmat() },
        Boundary::Separated { v0, v1 } => BrakeBoundary::Separated {
            v0: v0.to_cmat(),
            v1: v1.to_cmat(),
        },
        _ => unreachable!(),
    }
}

fn run_bott(p: &ProblemFile) -> Result<Outcome, RunError> {
    let Some(Boundary::Twisted { omega_turns, p: pm }) = &p.boundary else { unreachable!() };
    let pb = BottProblem {
        n: p.n,
        tau: p.interval.unwrap()[1],
        b: coef(p, "B", 2 * p.n).unwrap(),
        p: pm.to_cmat(),
        omega_turns: *omega_turns,
    };
    let rep = bott_iteration_check(&pb, p.numerics.iterations.unwrap(), p.numerics.steps.unwrap(), &maslov_options(p))?;
    Ok(identity_outcome(&rep))
}

fn run_brake(p: &ProblemFile) -> Result<Outcome, RunError> {
    let Some(Symmetry::Brake { n }) = &p.symmetry else { unreachable!() };
    let pb = BrakeProblem {
        n: p.n,
        period: p.interval.unwrap()[1],
        b: coef(p, "B", 2 * p.n).unwrap(),
        nmat: n.to_cmat(),
        boundary: brake_boundary(p.boundary.as_ref().unwrap()),
    };
    Ok(identity_outcome(&brake_symmetry_check(&pb, p.numerics.steps.unwrap(), &maslov_options(p))?))
}

fn ends(p: &ProblemFile) -> (CMat, CMat, Option<CMat>, Option<CMat>) {
    let Some(Boundary::HyperbolicEnds {
        minus,
        plus,
        minus_slope,
        plus_slope,
    }) = &p.boundary
    else {
        unreachable!()
    };
    (
        minus.to_cmat(),
        plus.to_cmat(),
        minus_slope.as_ref().map(|m| m.to_cmat()),
        plus_slope.as_ref().map(|m| m.to_cmat()),
    )
}

fn run_heteroclinic(p: &ProblemFile) -> Result<Outcome, RunError> {
    let Some(Symmetry::Brake { n }) = &p.symmetry else { unreachable!() };
    let nmat = n.to_cmat();
    let (minus, plus, ms, ps) = ends(p);
    let sloped = ms.is_some() || ps.is_some();
    let end = |base: CMat, slope: Option<CMat>| -> Arc<dyn Fn(f64) -> CMat + Send + Sync> {
        match slope {
            Some(sl) => Arc::new(move |lam| &base + &sl * c(lam)),
            None => Arc::new(move |_| base.clone()),
        }
    };
    let fam = LineFamily {
        n: p.n,
        b: family_fn(p),
        b_minus: end(minus, ms),
        b_plus: end(plus, ps),
    };
    let (l, steps) = (p.numerics.truncation.unwrap(), p.numerics.steps.unwrap());
    let mopts = maslov_options(p);
    let rep = heteroclinic_brake_check(&fam, &nmat, l, steps, &mopts)?;
    let minus_side = identity_outcome(&rep.minus_side);
    let plus_side = identity_outcome(&rep.plus_side);
    let mut c = cert(minus_side.cert.passed && plus_side.cert.passed);
    c.residual = Some(rep.minus_side.residual.abs() + rep.plus_side.residual.abs());
    c.notes = rep.minus_side.diagnostics.clone();
    let mut result = json!({
        "minus_side": minus_side.result,
        "plus_side": plus_side.result,
        "truncation": l,
    });
    if sloped {
        c.notes.push("λ-dependent ends: discretized spectral-flow cross-check skipped".into());
    } else {
        let g = grid(p);
        let sopts = sf_options(p, 0);
        let (a, b) = rayon::join(
            || heteroclinic_sf_consistency(&fam, l, &g, steps, &mopts, &sopts),
            || heteroclinic_sf_consistency(&fam, l, &g.refined(), steps, &mopts, &sopts),
        );
        let ((minus_sf, mu), (minus_sf_refined, _)) = (a?, b?);
        result["minus_sf"] = json!(minus_sf);
        result["minus_sf_refined"] = json!(minus_sf_refined);
        result["mu_stable_unstable"] = json!(mu);
        c.grid_stable = Some(minus_sf == minus_sf_refined);
        c.passed &= minus_sf == mu && minus_sf == minus_sf_refined && mu == rep.minus_side.lhs;
    }
    Ok(Outcome {
        result,
        cert: c,
        trace: None,
    })
}

fn run_homoclinic(p: &ProblemFile) -> Result<Outcome, RunError> {
    let Some(Symmetry::Brake { n }) = &p.symmetry else { unreachable!() };
    let nmat = n.to_cmat();
    let (bstar, _, _, _) = ends(p);
    let b = coef(p, "B", 2 * p.n).unwrap();
    let (l, g, sopts) = (p.numerics.truncation.unwrap(), grid(p), sf_options(p, 0));
    let run = |l: f64, g: &SemGrid| homoclinic_index_decomposition(p.n, b.clone(), &bstar, &nmat, l, g, &sopts);
    let (base, (refined, longer)) = rayon::join(|| run(l, &g), || rayon::join(|| run(l, &g.refined()), || run(1.5 * l, &g)));
    let (base, refined, longer) = (base?, refined?, longer?);
    let mut out = identity_outcome(&base);
    let stable = refined.lhs == base.lhs
        && longer.lhs == base.lhs
        && refined.rhs_terms.iter().map(|t| t.value).eq(base.rhs_terms.iter().map(|t| t.value))
        && longer.rhs_terms.iter().map(|t| t.value).eq(base.rhs_terms.iter().map(|t| t.value));
    out.cert.grid_stable = Some(stable);
    out.cert.passed &= stable && refined.holds() && longer.holds();
    out.cert.notes.push(format!("checked again on the refined grid and at L = {}", 1.5 * l));
    Ok(out)
}

fn run_geodesic(p: &ProblemFile) -> Result<Outcome, RunError> {
    let Some(Boundary::Twisted { omega_turns, p: pm }) = &p.boundary else { unreachable!() };
    let pb = GeodesicProblem {
        k: p.n,
        period: p.interval.unwrap()[1],
        g: p.coefficients["G"].constant_value().unwrap(),
        r: coef(p, "R", p.n).unwrap(),
        p: pm.to_cmat(),
        omega_turns: *omega_turns,
    };
    let rep = geodesic_iteration_check(
        &pb,
        p.numerics.iterations.unwrap(),
        p.numerics.s_start.unwrap(),
        &grid(p),
        &sf_options(p, 0),
    )?;
    Ok(identity_outcome(&rep))
}

fn suite_json(o: &SuiteOutcome) -> Value {
    json!({
        "name": o.name,
        "seed": o.seed,
        "instances": o.instances,
        "passed": o.passed,
        "rejected": o.rejected,
        "failures": o.failures,
    })
}

fn run_axioms(p: &ProblemFile) -> Outcome {
    let (seed, count) = (p.numerics.seed.unwrap(), p.numerics.count.unwrap());
    let (sf, mu) = rayon::join(|| sf_axiom_suites(seed, count), || maslov_axiom_suites(seed.wrapping_add(1), count));
    let all: Vec<SuiteOutcome> = sf.into_iter().chain(mu).collect();
    let mut c = cert(all.iter().all(SuiteOutcome::ok));
    c.notes.push(format!("seeds {seed} (sf) and {} (Maslov)", seed.wrapping_add(1)));
    Outcome {
        result: json!({ "suites": all.iter().map(suite_json).collect::<Vec<_>>() }),
        cert: c,
        trace: None,
    }
}
