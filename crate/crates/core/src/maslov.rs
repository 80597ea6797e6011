//! Maslov index of a pair of Lagrangian paths through crossing forms.
//!
//! Convention: μ = m⁺(Γ(a)) + Σ_interior sign Γ(t₀) − m⁻(Γ(b)).

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::*;
use crate::symplectic::{doubled_lagrangian, graph_frame, LagrangianFrame};

pub type FrameFn = Arc<dyn Fn(f64) -> CMat + Send + Sync>;

/// t ↦ frame of a Lagrangian subspace of (ℂ^{2N}, j). Frames need not be orthonormal.
#[derive(Clone)]
pub struct LagrangianPath {
    pub a: f64,
    pub b: f64,
    pub j: CMat,
    eval: FrameFn,
}

impl std::fmt::Debug for LagrangianPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LagrangianPath[{}, {}] in dim {}", self.a, self.b, self.j.nrows())
    }
}

impl LagrangianPath {
    pub fn new(a: f64, b: f64, j: CMat, eval: FrameFn) -> Self {
        LagrangianPath { a, b, j, eval }
    }

    pub fn constant(frame: &LagrangianFrame, j: CMat, a: f64, b: f64) -> Self {
        let z = frame.frame.clone();
        LagrangianPath::new(a, b, j, Arc::new(move |_| z.clone()))
    }

    pub fn raw(&self, t: f64) -> CMat {
        (self.eval)(t)
    }

    pub fn orth_at(&self, t: f64) -> CMat {
        orth(&self.raw(t), 1e-12)
    }

    pub fn frame(&self, t: f64, tol: f64) -> Result<LagrangianFrame> {
        LagrangianFrame::new(&self.raw(t), &self.j, tol)
    }

    /// Same subspaces on a new parameter domain via t = φ(τ).
    pub fn reparametrized(&self, a: f64, b: f64, phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> Self {
        let e = self.eval.clone();
        LagrangianPath::new(a, b, self.j.clone(), Arc::new(move |t| e(phi(t))))
    }

    pub fn restricted(&self, a: f64, b: f64) -> Self {
        LagrangianPath::new(a, b, self.j.clone(), self.eval.clone())
    }

    /// Apply a path of linear maps: L(t) ↦ M(t) L(t).
    pub fn transformed(&self, m: FrameFn, j: CMat) -> Self {
        let e = self.eval.clone();
        LagrangianPath::new(self.a, self.b, j, Arc::new(move |t| m(t) * e(t)))
    }
}

/// Direct sum of two pairs' ambient spaces (symplectic additivity).
pub fn direct_sum(p: &LagrangianPath, q: &LagrangianPath) -> LagrangianPath {
    let (e1, e2) = (p.eval.clone(), q.eval.clone());
    LagrangianPath::new(
        p.a,
        p.b,
        block_diag(&[&p.j, &q.j]),
        Arc::new(move |t| block_diag(&[&e1(t), &e2(t)])),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Endpoint {
    Left,
    Interior,
    Right,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossingRecord {
    pub t: f64,
    pub dim: usize,
    pub form_eigenvalues: Vec<f64>,
    pub positive: usize,
    pub negative: usize,
    pub signature: i64,
    pub endpoint: Endpoint,
    pub contribution: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MaslovReport {
    pub total: i64,
    pub crossings: Vec<CrossingRecord>,
    /// min |eigenvalue of Γ| over all crossings (∞ when there are none).
    pub regularity: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct MaslovOptions {
    pub grid: usize,
    /// bisection/golden-section tolerance relative to b − a
    pub time_tol: f64,
    /// finite-difference step relative to b − a
    pub fd_step: f64,
    /// smallest singular value of [Q1 | Q2] accepted as an intersection
    pub intersect_tol: f64,
    /// crossing forms with an eigenvalue below reg_tol/(b − a) are degenerate
    pub reg_tol: f64,
    /// grid minima above this are not refined
    pub scan_threshold: f64,
}

impl Default for MaslovOptions {
    fn default() -> Self {
        MaslovOptions {
            grid: 256,
            time_tol: 1e-10,
            fd_step: 1e-5,
            intersect_tol: 1e-7,
            reg_tol: 1e-6,
            scan_threshold: 0.3,
        }
    }
}

fn indicator_matrix(q1: &CMat, q2: &CMat) -> CMat {
    hstack(q1, q2)
}

fn indicator(p1: &LagrangianPath, p2: &LagrangianPath, t: f64) -> f64 {
    let m = indicator_matrix(&p1.orth_at(t), &p2.orth_at(t));
    singular_values(&m).last().copied().unwrap_or(0.0)
}

/// Chart S(t) = C A⁻¹ of L(t) over L(t0) with complement J L(t0).
fn chart(q0: &CMat, w: &CMat, z: &CMat) -> Result<CMat> {
    let a = q0.adjoint() * z;
    let cc = w.adjoint() * z;
    let ainv = inverse(&a).ok_or_else(|| {
        Error::Resolution("chart not defined: finite-difference step too large".into())
    })?;
    Ok(cc * ainv)
}

/// Form matrix of d/dt ω(v, φ(t)v) at t0 in the coordinates v = q0·x.
fn path_form(p: &LagrangianPath, t0: f64, h: f64, q0: &CMat) -> Result<CMat> {
    let w = &p.j * q0;
    let s = |t: f64| chart(q0, &w, &p.raw(t));
    let left = t0 - 2.0 * h < p.a;
    let right = t0 + 2.0 * h > p.b;
    let deriv = if !left && !right {
        let d1 = (s(t0 + h)? - s(t0 - h)?) * c(1.0 / (2.0 * h));
        let d2 = (s(t0 + 2.0 * h)? - s(t0 - 2.0 * h)?) * c(1.0 / (4.0 * h));
        (d1 * c(4.0) - d2) * c(1.0 / 3.0)
    } else if left {
        let f = |hh: f64| -> Result<CMat> {
            Ok((s(t0 + hh)? * c(4.0) - s(t0 + 2.0 * hh)? - s(t0)? * c(3.0)) * c(1.0 / (2.0 * hh)))
        };
        let h = h.min((p.b - t0) / 4.0);
        (f(h)? * c(4.0) - f(2.0 * h)?) * c(1.0 / 3.0)
    } else {
        let f = |hh: f64| -> Result<CMat> {
            Ok((s(t0)? * c(3.0) - s(t0 - hh)? * c(4.0) + s(t0 - 2.0 * hh)?) * c(1.0 / (2.0 * hh)))
        };
        let h = h.min((t0 - p.a) / 4.0);
        (f(h)? * c(4.0) - f(2.0 * h)?) * c(1.0 / 3.0)
    };
    Ok(hermitian_part(&deriv.adjoint()))
}

/// Crossing form Γ = Q(L2) − Q(L1) on an orthonormal basis of L1(t0) ∩ L2(t0).
pub fn crossing_form(p1: &LagrangianPath, p2: &LagrangianPath, t0: f64, h: f64) -> Result<CMat> {
    let basis = crossing_basis(p1, p2, t0, 1e-6)?;
    crossing_form_on(p1, p2, t0, h, &basis)
}

fn crossing_basis(p1: &LagrangianPath, p2: &LagrangianPath, t0: f64, tol: f64) -> Result<CMat> {
    let q1 = p1.orth_at(t0);
    let q2 = p2.orth_at(t0);
    let m = indicator_matrix(&q1, &q2);
    let svd = m.svd(false, true);
    let vt = svd.v_t.unwrap();
    let k = q1.ncols();
    let mut cols = Vec::new();
    for i in 0..svd.singular_values.len() {
        if svd.singular_values[i] <= tol {
            let v = vt.row(i).adjoint();
            let a = v.rows(0, k).into_owned();
            cols.push(&q1 * a);
        }
    }
    if cols.is_empty() {
        return Err(Error::Resolution(format!("no intersection at t = {t0}")));
    }
    let mut x = CMat::zeros(q1.nrows(), cols.len());
    for (i, col) in cols.iter().enumerate() {
        x.set_column(i, col);
    }
    Ok(orth(&x, 1e-8))
}

fn crossing_form_on(
    p1: &LagrangianPath,
    p2: &LagrangianPath,
    t0: f64,
    h: f64,
    basis: &CMat,
) -> Result<CMat> {
    let q1 = p1.orth_at(t0);
    let q2 = p2.orth_at(t0);
    let f1 = path_form(p1, t0, h, &q1)?;
    let f2 = path_form(p2, t0, h, &q2)?;
    let a1 = q1.adjoint() * basis;
    let a2 = q2.adjoint() * basis;
    let g = a2.adjoint() * f2 * &a2 - a1.adjoint() * f1 * &a1;
    Ok(hermitian_part(&g))
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    let (fl, fh) = (f(lo), f(hi));
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if fl < best.1 {
        best = (lo, fl);
    }
    if fh < best.1 {
        best = (hi, fh);
    }
    best
}

fn local_minima(ts: &[f64], fs: &[f64], threshold: f64, out: &mut Vec<(f64, f64)>) {
    let g = ts.len() - 1;
    for k in 0..=g {
        let left_ok = k == 0 || fs[k] <= fs[k - 1];
        let right_ok = k == g || fs[k] <= fs[k + 1];
        if left_ok && right_ok && fs[k] < threshold {
            out.push((ts[k.saturating_sub(1)], ts[(k + 1).min(g)]));
        }
    }
}

/// Locate crossing times on [a, b].
pub fn locate_crossings(p1: &LagrangianPath, p2: &LagrangianPath, opts: &MaslovOptions) -> Vec<f64> {
    let (a, b) = (p1.a, p1.b);
    let g = opts.grid.max(4);
    let ts: Vec<f64> = (0..=g).map(|k| a + (b - a) * k as f64 / g as f64).collect();
    let fs: Vec<f64> = ts.par_iter().map(|&t| indicator(p1, p2, t)).collect();
    let tol_t = opts.time_tol * (b - a);
    let mut brackets = Vec::new();
    local_minima(&ts, &fs, opts.scan_threshold, &mut brackets);
    // resolve crossings that share a scan cell
    for _ in 0..2 {
        let refined: Vec<Vec<(f64, f64)>> = brackets
            .par_iter()
            .map(|&(lo, hi)| {
                let sub: Vec<f64> = (0..=32).map(|k| lo + (hi - lo) * k as f64 / 32.0).collect();
                let fsub: Vec<f64> = sub.iter().map(|&t| indicator(p1, p2, t)).collect();
                let mut out = Vec::new();
                local_minima(&sub, &fsub, opts.scan_threshold, &mut out);
                // a flat indicator means a persistent intersection; keep the coarse bracket
                if out.is_empty() || out.len() > 4 {
                    vec![(lo, hi)]
                } else {
                    out
                }
            })
            .collect();
        brackets = refined.into_iter().flatten().collect();
        brackets.dedup_by(|x, y| (x.0 - y.0).abs() < 1e-15 && (x.1 - y.1).abs() < 1e-15);
    }
    let mut found: Vec<f64> = brackets
        .par_iter()
        .filter_map(|&(lo, hi)| {
            let (t, f) = golden_min(|t| indicator(p1, p2, t), lo, hi, tol_t);
            (f <= opts.intersect_tol).then_some(t)
        })
        .collect();
    // exact endpoint intersections take precedence over nearby minima
    for &e in &[a, b] {
        if indicator(p1, p2, e) <= opts.intersect_tol {
            found.retain(|&t| (t - e).abs() > 1e3 * tol_t);
            found.push(e);
        }
    }
    found.sort_by(|x, y| x.partial_cmp(y).unwrap());
    found.dedup_by(|x, y| (*x - *y).abs() <= 1e3 * tol_t);
    found
}

pub fn maslov_index(p1: &LagrangianPath, p2: &LagrangianPath, opts: &MaslovOptions) -> Result<MaslovReport> {
    if p1.j.nrows() != p2.j.nrows() || (p1.a - p2.a).abs() > 0.0 || (p1.b - p2.b).abs() > 0.0 {
        return Err(Error::Dimension("paths must share ambient space and domain".into()));
    }
    let (a, b) = (p1.a, p1.b);
    let times = locate_crossings(p1, p2, opts);
    let h = opts.fd_step * (b - a);
    let reg = opts.reg_tol / (b - a);
    let mut crossings = Vec::new();
    let mut total = 0i64;
    let mut regularity = f64::INFINITY;
    for t0 in times {
        let basis = crossing_basis(p1, p2, t0, 1e-5)?;
        let wide = crossing_basis(p1, p2, t0, 1e-3)?;
        if wide.ncols() != basis.ncols() {
            return Err(Error::Resolution(format!(
                "crossing cluster near t = {t0}: intersection dimension {} vs {} at looser tolerance",
                basis.ncols(),
                wide.ncols()
            )));
        }
        let g = crossing_form_on(p1, p2, t0, h, &basis)?;
        let ev = herm_eigvals(&g);
        let minabs = ev.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        regularity = regularity.min(minabs);
        if minabs < reg {
            return Err(Error::DegenerateCrossing {
                t: t0,
                eigenvalues: ev,
            });
        }
        let pos = ev.iter().filter(|&&v| v > 0.0).count();
        let neg = ev.len() - pos;
        let endpoint = if t0 == a {
            Endpoint::Left
        } else if t0 == b {
            Endpoint::Right
        } else {
            Endpoint::Interior
        };
        let contribution = match endpoint {
            Endpoint::Left => pos as i64,
            Endpoint::Interior => pos as i64 - neg as i64,
            Endpoint::Right => -(neg as i64),
        };
        total += contribution;
        crossings.push(CrossingRecord {
            t: t0,
            dim: ev.len(),
            form_eigenvalues: ev,
            positive: pos,
            negative: neg,
            signature: pos as i64 - neg as i64,
            endpoint,
            contribution,
        });
    }
    Ok(MaslovReport {
        total,
        crossings,
        regularity,
    })
}

/// Path s ↦ Gr(γ(s)) in the doubled space.
pub fn graph_path(n: usize, a: f64, b: f64, gamma: FrameFn) -> LagrangianPath {
    LagrangianPath::new(a, b, doubled_j(n), Arc::new(move |s| graph_frame(&gamma(s))))
}

/// μ(Λ, Gr(γ(s)); s ∈ [a, b]) with Λ fixed in the doubled space.
pub fn maslov_vs_graph(
    lambda: &LagrangianFrame,
    n: usize,
    a: f64,
    b: f64,
    gamma: FrameFn,
    opts: &MaslovOptions,
) -> Result<MaslovReport> {
    if lambda.ambient() != 4 * n {
        return Err(Error::Dimension(format!(
            "Λ must live in dimension {}, got {}",
            4 * n,
            lambda.ambient()
        )));
    }
    doubled_lagrangian(&lambda.frame, 1e-8)?;
    let l1 = LagrangianPath::constant(lambda, doubled_j(n), a, b);
    let l2 = graph_path(n, a, b, gamma);
    maslov_index(&l1, &l2, opts)
}

/// μ(V, γ(t)·W) in (ℂ^{2n}, ω) with V, W fixed.
pub fn maslov_fixed_vs_moving(
    v: &LagrangianFrame,
    w: &LagrangianFrame,
    a: f64,
    b: f64,
    gamma: FrameFn,
    opts: &MaslovOptions,
) -> Result<MaslovReport> {
    let n = v.ambient() / 2;
    let l1 = LagrangianPath::constant(v, j_matrix(n), a, b);
    let wf = w.frame.clone();
    let l2 = LagrangianPath::new(a, b, j_matrix(n), Arc::new(move |t| gamma(t) * &wf));
    maslov_index(&l1, &l2, opts)
}
