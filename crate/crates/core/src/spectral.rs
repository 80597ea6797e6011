//! Spectral flow of Hermitian paths, the relative Morse index, and spectral-element
//! discretizations of first-order Hamiltonian and second-order Sturm–Liouville operators.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::*;
use crate::sem::{gauss_legendre, legendre};
use crate::symplectic::{doubled_lagrangian, graph_frame};

pub type HermFn = Arc<dyn Fn(f64) -> Result<CMat> + Send + Sync>;

/// s ↦ A(s) on [a, b], optionally a pencil with constant mass.
#[derive(Clone)]
pub struct HermitianPath {
    pub a: f64,
    pub b: f64,
    eval: HermFn,
    pub mass: Option<CMat>,
}

impl std::fmt::Debug for HermitianPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "HermitianPath[{}, {}]", self.a, self.b)
    }
}

impl HermitianPath {
    pub fn new(a: f64, b: f64, f: impl Fn(f64) -> CMat + Send + Sync + 'static) -> Self {
        HermitianPath {
            a,
            b,
            eval: Arc::new(move |s| Ok(f(s))),
            mass: None,
        }
    }

    pub fn fallible(a: f64, b: f64, eval: HermFn) -> Self {
        HermitianPath { a, b, eval, mass: None }
    }

    pub fn with_mass(mut self, mass: CMat) -> Self {
        self.mass = Some(mass);
        self
    }

    pub fn constant(a: f64, b: f64, m: CMat) -> Self {
        HermitianPath::new(a, b, move |_| m.clone())
    }

    /// The standard Hermitian matrix at s (pencils reduced by Cholesky congruence).
    pub fn matrix(&self, s: f64) -> Result<CMat> {
        let m = (self.eval)(s)?;
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!("{}x{} path value", m.nrows(), m.ncols())));
        }
        let res = herm_residual(&m);
        if res > 1e-8 * frob(&m).max(1.0) {
            return Err(Error::Coefficient(format!("path value not Hermitian, residual {res:.3e}")));
        }
        match &self.mass {
            None => Ok(hermitian_part(&m)),
            Some(mass) => pencil_reduce(&m, mass)
                .ok_or_else(|| Error::Coefficient("mass matrix not positive definite".into())),
        }
    }

    /// Unreduced value (stiffness for pencils).
    pub fn raw(&self, s: f64) -> Result<CMat> {
        (self.eval)(s)
    }

    pub fn dim(&self) -> Result<usize> {
        Ok(self.raw(self.a)?.nrows())
    }

    pub fn restricted(&self, a: f64, b: f64) -> Self {
        HermitianPath {
            a,
            b,
            eval: self.eval.clone(),
            mass: self.mass.clone(),
        }
    }

    pub fn reversed(&self) -> Self {
        let (a, b) = (self.a, self.b);
        let e = self.eval.clone();
        HermitianPath {
            a,
            b,
            eval: Arc::new(move |s| e(a + b - s)),
            mass: self.mass.clone(),
        }
    }

    /// τ ↦ A(φ(τ)) on [a, b].
    pub fn reparametrized(&self, a: f64, b: f64, phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> Self {
        let e = self.eval.clone();
        HermitianPath {
            a,
            b,
            eval: Arc::new(move |s| e(phi(s))),
            mass: self.mass.clone(),
        }
    }

    /// s ↦ M(s)* A(s) M(s).
    pub fn cogredient(&self, m: Arc<dyn Fn(f64) -> CMat + Send + Sync>) -> Self {
        let me = self.clone();
        HermitianPath::fallible(
            self.a,
            self.b,
            Arc::new(move |s| {
                let a = me.matrix(s)?;
                let ms = m(s);
                Ok(hermitian_part(&(ms.adjoint() * a * ms)))
            }),
        )
    }

    pub fn direct_sum(&self, other: &HermitianPath) -> Self {
        let (p, q) = (self.clone(), other.clone());
        HermitianPath::fallible(
            self.a,
            self.b,
            Arc::new(move |s| Ok(block_diag(&[&p.matrix(s)?, &q.matrix(s)?]))),
        )
    }

    /// s ↦ W* A(s) W for a fixed basis W (and W* mass W for pencils).
    pub fn compressed(&self, w: &CMat) -> Self {
        let e = self.eval.clone();
        let w1 = w.clone();
        HermitianPath {
            a: self.a,
            b: self.b,
            eval: Arc::new(move |s| Ok(hermitian_part(&(w1.adjoint() * e(s)? * &w1)))),
            mass: self.mass.as_ref().map(|m| hermitian_part(&(w.adjoint() * m * w))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SfOptions {
    /// absolute kernel tolerance; defaults to rel_ktol·‖A‖
    pub ktol: Option<f64>,
    pub rel_ktol: f64,
    /// eigenvalues in (ktol, band·ktol] make the kernel decision ambiguous
    pub band: f64,
    /// eigenvalues in (floor·ktol, ktol] are too large to be roundoff kernels
    pub floor: f64,
    /// number of diagnostic sweep samples (0 disables)
    pub trace: usize,
}

impl Default for SfOptions {
    fn default() -> Self {
        SfOptions {
            ktol: None,
            rel_ktol: 1e-8,
            band: 10.0,
            floor: 1e-3,
            trace: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceSample {
    pub s: f64,
    pub eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SfReport {
    pub sf: i64,
    pub kernel_a: usize,
    pub kernel_b: usize,
    pub below_a: usize,
    pub below_b: usize,
    pub epsilon: f64,
    pub ktol: f64,
    /// smallest |eigenvalue| above ktol at each end
    pub gap_a: f64,
    pub gap_b: f64,
    pub trace: Vec<TraceSample>,
}

fn endpoint_data(ev: &[f64], ktol: f64, band: f64, floor: f64) -> Result<(usize, f64)> {
    let kernel = ev.iter().filter(|v| v.abs() <= ktol).count();
    if let Some(v) = ev.iter().find(|v| v.abs() <= ktol && v.abs() > floor * ktol) {
        return Err(Error::Tolerance(format!(
            "eigenvalue of size {:.3e} within the ambiguity band below ktol = {ktol:.3e}",
            v.abs()
        )));
    }
    let gap = ev
        .iter()
        .map(|v| v.abs())
        .filter(|&v| v > ktol)
        .fold(f64::INFINITY, f64::min);
    if gap <= band * ktol {
        return Err(Error::Tolerance(format!(
            "eigenvalue of size {gap:.3e} within the ambiguity band above ktol = {ktol:.3e}"
        )));
    }
    Ok((kernel, gap))
}

pub fn spectral_flow(path: &HermitianPath, opts: &SfOptions) -> Result<SfReport> {
    let (ma, mb) = rayon::join(|| path.matrix(path.a), || path.matrix(path.b));
    let (ma, mb) = (ma?, mb?);
    if ma.nrows() != mb.nrows() {
        return Err(Error::Dimension("endpoint matrices differ in size".into()));
    }
    let (ea, eb) = rayon::join(|| herm_eigvals(&ma), || herm_eigvals(&mb));
    let norm = ea
        .iter()
        .chain(eb.iter())
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    let ktol = opts.ktol.unwrap_or(opts.rel_ktol * norm.max(f64::MIN_POSITIVE));
    let (kernel_a, gap_a) = endpoint_data(&ea, ktol, opts.band, opts.floor)?;
    let (kernel_b, gap_b) = endpoint_data(&eb, ktol, opts.band, opts.floor)?;
    let mut epsilon = 0.5 * gap_a.min(gap_b);
    if !epsilon.is_finite() {
        epsilon = ktol * opts.band;
    }
    let below = |ev: &[f64]| ev.iter().filter(|&&v| v < -epsilon).count();
    let (below_a, below_b) = (below(&ea), below(&eb));
    let trace = if opts.trace > 1 {
        let samples: Vec<f64> = (0..opts.trace)
            .map(|k| path.a + (path.b - path.a) * k as f64 / (opts.trace - 1) as f64)
            .collect();
        samples
            .par_iter()
            .map(|&s| {
                Ok(TraceSample {
                    s,
                    eigenvalues: herm_eigvals(&path.matrix(s)?),
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(SfReport {
        sf: below_a as i64 - below_b as i64,
        kernel_a,
        kernel_b,
        below_a,
        below_b,
        epsilon,
        ktol,
        gap_a,
        gap_b,
        trace,
    })
}

/// I(A, A − B) = −sf(A − sB; s ∈ [0, 1]).
pub fn relative_morse_index(a: &CMat, b: &CMat, opts: &SfOptions) -> Result<i64> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension("A and B differ in shape".into()));
    }
    let (a, b) = (a.clone(), b.clone());
    let path = HermitianPath::new(0.0, 1.0, move |s| &a - &b * c(s));
    Ok(-spectral_flow(&path, opts)?.sf)
}

/// Number of eigenvalues below −ktol.
pub fn morse_index(a: &CMat, ktol: f64) -> usize {
    herm_eigvals(a).iter().filter(|&&v| v < -ktol).count()
}

// ---------------------------------------------------------------------------
// Spectral-element discretization

/// M uniform elements carrying Legendre polynomials of degree ≤ p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SemGrid {
    pub elements: usize,
    pub degree: usize,
}

impl SemGrid {
    pub fn new(elements: usize, degree: usize) -> Result<Self> {
        if elements == 0 || degree < 2 {
            return Err(Error::Grid(format!(
                "need at least one element and degree ≥ 2, got M = {elements}, p = {degree}"
            )));
        }
        Ok(SemGrid { elements, degree })
    }

    pub fn hamiltonian_default() -> Self {
        SemGrid { elements: 4, degree: 16 }
    }

    pub fn sturm_liouville_default() -> Self {
        SemGrid { elements: 8, degree: 12 }
    }

    /// Twice as many elements.
    pub fn refined(&self) -> Self {
        SemGrid {
            elements: 2 * self.elements,
            degree: self.degree,
        }
    }

    /// Scale the element count, keeping at least one element.
    pub fn scaled(&self, factor: f64) -> Self {
        SemGrid {
            elements: ((self.elements as f64 * factor).round() as usize).max(1),
            degree: self.degree,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum OperatorKind {
    /// −J d/dt − B on ℂ^{2n}, basis Φ(τ) e_c L_k with Φ(τ) = exp(θτ/h J)
    Hamiltonian { n: usize, theta: f64 },
    /// −(G u′)′ + R u on ℂ^k
    SturmLiouville { k: usize },
}

/// Constrained pencil (K, mass) = (C* K_full C, C* M_full C).
#[derive(Clone, Debug)]
pub struct DiscretizedOperator {
    pub kind: OperatorKind,
    pub t0: f64,
    pub t1: f64,
    pub grid: SemGrid,
    /// components per coefficient (2n or k)
    pub block: usize,
    pub k_full: CMat,
    pub mass_full: CMat,
    /// orthonormal basis of the constrained coefficient space
    pub basis: CMat,
    pub k: CMat,
    pub mass: CMat,
    pub herm_residual: f64,
}

impl DiscretizedOperator {
    pub fn h(&self) -> f64 {
        (self.t1 - self.t0) / self.grid.elements as f64
    }

    pub fn local_size(&self) -> usize {
        (self.grid.degree + 1) * self.block
    }

    pub fn full_size(&self) -> usize {
        self.grid.elements * self.local_size()
    }

    pub fn index(&self, element: usize, k: usize, comp: usize) -> usize {
        element * self.local_size() + k * self.block + comp
    }

    /// Number of independent linear constraints.
    pub fn codimension(&self) -> usize {
        self.full_size() - self.basis.ncols()
    }

    pub fn reduced(&self) -> Result<CMat> {
        pencil_reduce(&self.k, &self.mass)
            .ok_or_else(|| Error::Coefficient("constrained mass not positive definite".into()))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(herm_eigvals(&self.reduced()?))
    }

    /// Eigenvalues closest to zero, sorted by value.
    pub fn eigenvalues_near_zero(&self, count: usize) -> Result<Vec<f64>> {
        let mut ev = self.eigenvalues()?;
        ev.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
        ev.truncate(count);
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(ev)
    }

    /// Point values x(t) for a full coefficient vector.
    pub fn evaluate(&self, y: &CVec, t: f64) -> CVec {
        let h = self.h();
        let m = self.grid.elements;
        let e = (((t - self.t0) / h).floor().max(0.0) as usize).min(m - 1);
        let tau = t - self.t0 - e as f64 * h;
        let xi = 2.0 * tau / h - 1.0;
        let (v, _) = legendre(self.grid.degree, xi);
        let mut x = CVec::zeros(self.block);
        for (k, vk) in v.iter().enumerate() {
            let i0 = self.index(e, k, 0);
            x += y.rows(i0, self.block) * c(*vk);
        }
        match self.kind {
            OperatorKind::Hamiltonian { n, theta } => gauge(n, theta * tau / h) * x,
            OperatorKind::SturmLiouville { .. } => x,
        }
    }
}

/// cos(φ) I + sin(φ) J
pub fn gauge(n: usize, phi: f64) -> CMat {
    eye(2 * n) * c(phi.cos()) + j_matrix(n) * c(phi.sin())
}

/// End value operators (d × full) at the start and end of element e.
fn end_rows(d: usize, p: usize, m: usize, e: usize, at_end: bool, g: &CMat) -> CMat {
    let nloc = (p + 1) * d;
    let mut r = CMat::zeros(d, m * nloc);
    for k in 0..=p {
        let col = e * nloc + k * d;
        if at_end {
            r.view_mut((0, col), (d, d)).copy_from(g);
        } else {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            r.view_mut((0, col), (d, d)).copy_from(&(g * c(s)));
        }
    }
    r
}

/// K·X for block-diagonal K with square blocks of size nloc.
fn block_diag_mul(k: &CMat, nloc: usize, x: &CMat) -> CMat {
    let mut out = CMat::zeros(k.nrows(), x.ncols());
    for e in 0..k.nrows() / nloc {
        let r = e * nloc;
        out.rows_mut(r, nloc)
            .copy_from(&(k.view((r, r), (nloc, nloc)) * x.rows(r, nloc)));
    }
    out
}

fn constrain(
    kind: OperatorKind,
    t0: f64,
    t1: f64,
    grid: SemGrid,
    block: usize,
    k_full: CMat,
    mass_full: CMat,
    cons: CMat,
) -> Result<DiscretizedOperator> {
    let basis = null_space(&cons, 1e-10);
    let nloc = k_full.nrows() / grid.elements;
    let bt = basis.adjoint();
    let k = &bt * block_diag_mul(&k_full, nloc, &basis);
    let herm_residual = herm_residual(&k) / frob(&k).max(1.0);
    let k = hermitian_part(&k);
    let mass = hermitian_part(&(&bt * block_diag_mul(&mass_full, nloc, &basis)));
    Ok(DiscretizedOperator {
        kind,
        t0,
        t1,
        grid,
        block,
        k_full,
        mass_full,
        basis,
        k,
        mass,
        herm_residual,
    })
}

/// Monodromy of the spurious gauge-shadow modes of the first-order discretization.
pub fn spurious_monodromy(n: usize, grid: &SemGrid, theta: f64) -> CMat {
    let sign = if (grid.degree * grid.elements) % 2 == 0 { 1.0 } else { -1.0 };
    gauge(n, grid.elements as f64 * theta) * c(sign)
}

/// Transversality of Λ to the graph of the spurious monodromy.
pub fn gauge_score(n: usize, lambda_orth: &CMat, grid: &SemGrid, theta: f64) -> f64 {
    let s = orth(&graph_frame(&spurious_monodromy(n, grid, theta)), 1e-12);
    singular_values(&hstack(lambda_orth, &s)).last().copied().unwrap_or(0.0)
}

/// Gauge angle maximizing the worst transversality over the given boundary frames.
pub fn select_gauge(n: usize, lambdas: &[CMat], grid: &SemGrid) -> Result<(f64, f64)> {
    let qs: Vec<CMat> = lambdas.iter().map(|l| orth(l, 1e-12)).collect();
    let thetas: Vec<f64> = (0..60).map(|k| 0.6 + 1.9 * k as f64 / 59.0).collect();
    let scored: Vec<(f64, f64)> = thetas
        .par_iter()
        .map(|&th| {
            let s = qs
                .iter()
                .map(|q| gauge_score(n, q, grid, th))
                .fold(f64::INFINITY, f64::min);
            (th, s)
        })
        .collect();
    let best = scored
        .into_iter()
        .fold((0.0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    if best.1 < 1e-3 {
        return Err(Error::Grid(format!(
            "no gauge angle keeps the boundary condition transversal (best score {:.3e})",
            best.1
        )));
    }
    Ok(best)
}

/// Galerkin pencil of −J d/dt − B on [t0, t1] with (x(t0), x(t1)) ∈ Λ.
pub fn discretize_hamiltonian(
    n: usize,
    t0: f64,
    t1: f64,
    b: &(dyn Fn(f64) -> CMat + Sync),
    lambda: &CMat,
    grid: &SemGrid,
    theta: f64,
) -> Result<DiscretizedOperator> {
    let d = 2 * n;
    if !(t1 > t0) {
        return Err(Error::Grid(format!("empty interval [{t0}, {t1}]")));
    }
    if lambda.nrows() != 2 * d {
        return Err(Error::Boundary(format!(
            "boundary frame has {} rows, expected {}",
            lambda.nrows(),
            2 * d
        )));
    }
    let lam = doubled_lagrangian(lambda, 1e-8).map_err(|e| Error::Boundary(e.to_string()))?;
    let (m, p) = (grid.elements, grid.degree);
    let h = (t1 - t0) / m as f64;
    let nloc = (p + 1) * d;
    let (xq, wq) = gauss_legendre(p + 12);
    let basis: Vec<(Vec<f64>, Vec<f64>)> = xq.iter().map(|&x| legendre(p, x)).collect();
    let j = j_matrix(n);
    let blocks: Vec<Result<(CMat, CMat)>> = (0..m)
        .into_par_iter()
        .map(|e| {
            let mut kl = CMat::zeros(nloc, nloc);
            let mut ml = CMat::zeros(nloc, nloc);
            for (qi, &x) in xq.iter().enumerate() {
                let tau = (x + 1.0) * h / 2.0;
                let w = wq[qi] * h / 2.0;
                let phi = gauge(n, theta * tau / h);
                let dphi = &j * &phi * c(theta / h);
                let bt = b(t0 + e as f64 * h + tau);
                if bt.shape() != (d, d) {
                    return Err(Error::Coefficient(format!(
                        "B(t) has shape {:?}, expected {d}x{d}",
                        bt.shape()
                    )));
                }
                let (v, dv) = &basis[qi];
                let mut f = CMat::zeros(d, nloc);
                let mut df = CMat::zeros(d, nloc);
                for k in 0..=p {
                    f.view_mut((0, k * d), (d, d)).copy_from(&(&phi * c(v[k])));
                    df.view_mut((0, k * d), (d, d))
                        .copy_from(&(&dphi * c(v[k]) + &phi * c(dv[k] * 2.0 / h)));
                }
                let ft = f.adjoint();
                kl += (&ft * (-&j * &df) - &ft * &bt * &f) * c(w);
                ml += &ft * &f * c(w);
            }
            Ok((kl, ml))
        })
        .collect();
    let mut k_full = CMat::zeros(m * nloc, m * nloc);
    let mut mass_full = CMat::zeros(m * nloc, m * nloc);
    for (e, blk) in blocks.into_iter().enumerate() {
        let (kl, ml) = blk?;
        k_full.view_mut((e * nloc, e * nloc), (nloc, nloc)).copy_from(&kl);
        mass_full.view_mut((e * nloc, e * nloc), (nloc, nloc)).copy_from(&ml);
    }
    let id = eye(d);
    let rot = gauge(n, theta);
    let mut rows: Vec<CMat> = Vec::new();
    for e in 0..m.saturating_sub(1) {
        rows.push(end_rows(d, p, m, e, true, &rot) - end_rows(d, p, m, e + 1, false, &id));
    }
    let ends = vstack(&end_rows(d, p, m, 0, false, &id), &end_rows(d, p, m, m - 1, true, &rot));
    let zp = complement(&lam.frame);
    rows.push(zp.adjoint() * ends);
    let mut cons = rows[0].clone();
    for r in &rows[1..] {
        cons = vstack(&cons, r);
    }
    constrain(
        OperatorKind::Hamiltonian { n, theta },
        t0,
        t1,
        *grid,
        d,
        k_full,
        mass_full,
        cons,
    )
}

pub type FamilyFn = Arc<dyn Fn(f64, f64) -> CMat + Send + Sync>;

/// s ↦ discretized −J d/dt − B_s(t) with (x(t0), x(t1)) ∈ Λ_s, a single gauge for all s.
#[derive(Clone)]
pub struct HamiltonianFamily {
    pub n: usize,
    pub t0: f64,
    pub t1: f64,
    pub s0: f64,
    pub s1: f64,
    /// (s, t) ↦ B_s(t)
    pub b: FamilyFn,
    /// s ↦ frame of Λ_s
    pub lambda: Arc<dyn Fn(f64) -> CMat + Send + Sync>,
}

impl HamiltonianFamily {
    pub fn operator(&self, s: f64, grid: &SemGrid, theta: f64) -> Result<DiscretizedOperator> {
        let bf = self.b.clone();
        discretize_hamiltonian(self.n, self.t0, self.t1, &move |t| bf(s, t), &(self.lambda)(s), grid, theta)
    }

    pub fn gauge(&self, grid: &SemGrid) -> Result<f64> {
        let frames: Vec<CMat> = (0..9)
            .map(|k| (self.lambda)(self.s0 + (self.s1 - self.s0) * k as f64 / 8.0))
            .collect();
        Ok(select_gauge(self.n, &frames, grid)?.0)
    }

    pub fn path(&self, grid: &SemGrid) -> Result<HermitianPath> {
        let theta = self.gauge(grid)?;
        let me = self.clone();
        let g = *grid;
        Ok(HermitianPath::fallible(
            self.s0,
            self.s1,
            Arc::new(move |s| me.operator(s, &g, theta)?.reduced()),
        ))
    }

    pub fn spectral_flow(&self, grid: &SemGrid, opts: &SfOptions) -> Result<SfReport> {
        spectral_flow(&self.path(grid)?, opts)
    }

    /// Unreduced pencil path for a fixed boundary condition, plus the operator at s0.
    pub fn pencil_path(&self, grid: &SemGrid, theta: f64) -> Result<(HermitianPath, DiscretizedOperator)> {
        let op0 = self.operator(self.s0, grid, theta)?;
        let me = self.clone();
        let g = *grid;
        let path = HermitianPath::fallible(
            self.s0,
            self.s1,
            Arc::new(move |s| Ok(me.operator(s, &g, theta)?.k)),
        )
        .with_mass(op0.mass.clone());
        Ok((path, op0))
    }
}

#[derive(Clone, Debug)]
pub enum SlBoundary {
    /// u(t0) = ω P u(t1), u′(t0) = ω P u′(t1)
    Twisted { omega: C64, p: CMat },
    Dirichlet,
}

impl SlBoundary {
    pub fn periodic(k: usize) -> Self {
        SlBoundary::Twisted { omega: c(1.0), p: eye(k) }
    }
}

/// Galerkin pencil of −(G u′)′ + R u on [t0, t1].
pub fn discretize_sturm_liouville(
    k: usize,
    t0: f64,
    t1: f64,
    g: &(dyn Fn(f64) -> CMat + Sync),
    r: &(dyn Fn(f64) -> CMat + Sync),
    boundary: &SlBoundary,
    grid: &SemGrid,
) -> Result<DiscretizedOperator> {
    if !(t1 > t0) {
        return Err(Error::Grid(format!("empty interval [{t0}, {t1}]")));
    }
    let (m, p) = (grid.elements, grid.degree);
    let h = (t1 - t0) / m as f64;
    let nloc = (p + 1) * k;
    let (xq, wq) = gauss_legendre(p + 8);
    let basis: Vec<(Vec<f64>, Vec<f64>)> = xq.iter().map(|&x| legendre(p, x)).collect();
    let blocks: Vec<Result<(CMat, CMat)>> = (0..m)
        .into_par_iter()
        .map(|e| {
            let mut kl = CMat::zeros(nloc, nloc);
            let mut ml = CMat::zeros(nloc, nloc);
            for (qi, &x) in xq.iter().enumerate() {
                let t = t0 + e as f64 * h + (x + 1.0) * h / 2.0;
                let w = wq[qi] * h / 2.0;
                let (gt, rt) = (g(t), r(t));
                if gt.shape() != (k, k) || rt.shape() != (k, k) {
                    return Err(Error::Coefficient(format!("coefficients must be {k}x{k}")));
                }
                let sv = singular_values(&gt);
                if sv.last().copied().unwrap_or(0.0) <= 1e-12 * sv[0].max(1e-300) {
                    return Err(Error::Coefficient(format!("G({t:.6}) is singular")));
                }
                let (v, dv) = &basis[qi];
                for a in 0..=p {
                    for bb in 0..=p {
                        let kk = &gt * c(dv[a] * dv[bb] * 4.0 / (h * h)) + &rt * c(v[a] * v[bb]);
                        let mut blk = kl.view_mut((a * k, bb * k), (k, k));
                        blk += kk * c(w);
                        let mut mb = ml.view_mut((a * k, bb * k), (k, k));
                        for i in 0..k {
                            mb[(i, i)] += c(w * v[a] * v[bb]);
                        }
                    }
                }
            }
            Ok((kl, ml))
        })
        .collect();
    let mut k_full = CMat::zeros(m * nloc, m * nloc);
    let mut mass_full = CMat::zeros(m * nloc, m * nloc);
    for (e, blk) in blocks.into_iter().enumerate() {
        let (kl, ml) = blk?;
        k_full.view_mut((e * nloc, e * nloc), (nloc, nloc)).copy_from(&kl);
        mass_full.view_mut((e * nloc, e * nloc), (nloc, nloc)).copy_from(&ml);
    }
    let id = eye(k);
    let mut rows: Vec<CMat> = Vec::new();
    for e in 0..m.saturating_sub(1) {
        rows.push(end_rows(k, p, m, e, true, &id) - end_rows(k, p, m, e + 1, false, &id));
    }
    let start = end_rows(k, p, m, 0, false, &id);
    let end = end_rows(k, p, m, m - 1, true, &id);
    match boundary {
        SlBoundary::Dirichlet => {
            rows.push(start);
            rows.push(end);
        }
        SlBoundary::Twisted { omega, p: pm } => {
            if pm.shape() != (k, k) {
                return Err(Error::Boundary(format!("P must be {k}x{k}")));
            }
            if (omega.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::Boundary("ω must lie on the unit circle".into()));
            }
            let compat = frob(&(pm.adjoint() * g(t0) * pm - g(t1)));
            if compat > 1e-8 * frob(&g(t1)).max(1.0) {
                return Err(Error::Boundary(format!(
                    "P* G(t0) P ≠ G(t1), residual {compat:.3e}; the derivative condition is not natural"
                )));
            }
            rows.push(start - pm * c(1.0) * *omega * end);
        }
    }
    let mut cons = rows[0].clone();
    for r in &rows[1..] {
        cons = vstack(&cons, r);
    }
    constrain(
        OperatorKind::SturmLiouville { k },
        t0,
        t1,
        *grid,
        k,
        k_full,
        mass_full,
        cons,
    )
}
