//! Fundamental solutions of ż = J B(t) z and stable/unstable frames on ℝ.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::*;
use crate::symplectic::{invariant_subspace, lagrangian_from_frame, LagrangianFrame};

/// t ↦ matrix evaluator.
pub type MatFn = Arc<dyn Fn(f64) -> CMat + Send + Sync>;

pub fn constant_fn(m: CMat) -> MatFn {
    Arc::new(move |_| m.clone())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Interval {
    Finite { a: f64, b: f64 },
    /// ℝ realized on [−l, l].
    Line { l: f64 },
}

#[derive(Clone)]
pub struct HamiltonianSystem {
    pub n: usize,
    pub interval: Interval,
    pub b: MatFn,
    pub b_minus: Option<CMat>,
    pub b_plus: Option<CMat>,
}

impl std::fmt::Debug for HamiltonianSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HamiltonianSystem")
            .field("n", &self.n)
            .field("interval", &self.interval)
            .finish()
    }
}

impl HamiltonianSystem {
    pub fn on_interval(n: usize, a: f64, b: f64, bf: MatFn) -> Self {
        HamiltonianSystem {
            n,
            interval: Interval::Finite { a, b },
            b: bf,
            b_minus: None,
            b_plus: None,
        }
    }

    pub fn on_line(n: usize, l: f64, bf: MatFn, b_minus: CMat, b_plus: CMat) -> Self {
        HamiltonianSystem {
            n,
            interval: Interval::Line { l },
            b: bf,
            b_minus: Some(b_minus),
            b_plus: Some(b_plus),
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self.interval {
            Interval::Finite { a, b } => (a, b),
            Interval::Line { l } => (-l, l),
        }
    }
}

fn checked_b(b: &MatFn, t: f64, n: usize) -> Result<CMat> {
    let m = b(t);
    if m.nrows() != 2 * n || m.ncols() != 2 * n {
        return Err(Error::Coefficient(format!(
            "B({t}) is {}x{}, expected {}x{}",
            m.nrows(),
            m.ncols(),
            2 * n,
            2 * n
        )));
    }
    let r = herm_residual(&m);
    if r > 1e-10 * frob(&m).max(1.0) {
        return Err(Error::Coefficient(format!(
            "B({t}) is not symmetric (residual {r:.3e})"
        )));
    }
    Ok(m)
}

/// One midpoint-exponential step from t0 to t1 (either direction).
fn step(j: &CMat, b: &MatFn, t0: f64, t1: f64) -> CMat {
    let h = t1 - t0;
    expm(&(j * b(0.5 * (t0 + t1)) * c(h)))
}

/// Propagator γ(t1, t0) with `steps` uniform midpoint steps.
pub fn propagator(n: usize, b: &MatFn, t0: f64, t1: f64, steps: usize) -> CMat {
    let j = j_matrix(n);
    let steps = steps.max(1);
    let h = (t1 - t0) / steps as f64;
    let mut g = eye(2 * n);
    for k in 0..steps {
        let a = t0 + k as f64 * h;
        g = step(&j, b, a, a + h) * g;
    }
    g
}

/// B(t) = A₀ + Σ_k (C_k cos(2πkt/T) + S_k sin(2πkt/T)).
#[derive(Clone, Debug)]
pub struct TrigSeries {
    pub period: f64,
    pub a0: CMat,
    pub cos: Vec<CMat>,
    pub sin: Vec<CMat>,
}

impl TrigSeries {
    pub fn constant(a0: CMat, period: f64) -> Self {
        TrigSeries {
            period,
            a0,
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    pub fn eval(&self, t: f64) -> CMat {
        let w = 2.0 * std::f64::consts::PI / self.period;
        let mut m = self.a0.clone();
        for (k, ck) in self.cos.iter().enumerate() {
            m += ck * c((w * (k + 1) as f64 * t).cos());
        }
        for (k, sk) in self.sin.iter().enumerate() {
            m += sk * c((w * (k + 1) as f64 * t).sin());
        }
        m
    }

    pub fn to_fn(&self) -> MatFn {
        let me = self.clone();
        Arc::new(move |t| me.eval(t))
    }

    /// Largest spectral norm among the coefficients.
    pub fn amplitude(&self) -> f64 {
        std::iter::once(&self.a0)
            .chain(&self.cos)
            .chain(&self.sin)
            .map(op_norm)
            .fold(0.0, f64::max)
    }

    /// Random real symmetric coefficients, each of spectral norm at most `amp`.
    pub fn random(rng: &mut impl rand::Rng, dim: usize, harmonics: usize, amp: f64, period: f64) -> Self {
        let mut draw = || {
            let m = random_real_symmetric(rng, dim);
            let f = amp * rng.random_range(0.2..1.0) / op_norm(&m);
            m * c(f)
        };
        let a0 = draw();
        let cos = (0..harmonics).map(|_| draw()).collect();
        let sin = (0..harmonics).map(|_| draw()).collect();
        TrigSeries { period, a0, cos, sin }
    }

    pub fn scale(&mut self, f: f64) {
        self.a0 *= c(f);
        for m in self.cos.iter_mut().chain(self.sin.iter_mut()) {
            *m *= c(f);
        }
    }
}

#[derive(Clone)]
pub struct FlowPath {
    pub n: usize,
    pub grid: Vec<f64>,
    pub mats: Vec<CMat>,
    b: MatFn,
}

impl std::fmt::Debug for FlowPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FlowPath")
            .field("n", &self.n)
            .field("steps", &(self.grid.len() - 1))
            .finish()
    }
}

impl FlowPath {
    pub fn final_value(&self) -> &CMat {
        self.mats.last().unwrap()
    }

    /// γ(t) between grid points: partial midpoint step from the grid point below.
    pub fn at(&self, t: f64) -> CMat {
        let a = self.grid[0];
        let b = *self.grid.last().unwrap();
        let t = t.clamp(a, b);
        let m = self.grid.len() - 1;
        let h = (b - a) / m as f64;
        let k = (((t - a) / h).floor() as usize).min(m - 1);
        let t0 = self.grid[k];
        if (t - t0).abs() < 1e-15 * (b - a).abs().max(1.0) {
            return self.mats[k].clone();
        }
        step(&j_matrix(self.n), &self.b, t0, t) * &self.mats[k]
    }

    pub fn max_symplectic_residual(&self) -> f64 {
        let j = j_matrix(self.n);
        self.mats
            .iter()
            .map(|g| frob(&(g.adjoint() * &j * g - &j)))
            .fold(0.0, f64::max)
    }
}

/// γ̇ = J B γ, γ(a) = I, midpoint exponential steps.
pub fn fundamental_solution(sys: &HamiltonianSystem, steps: usize) -> Result<FlowPath> {
    let (a, b) = match sys.interval {
        Interval::Finite { a, b } => (a, b),
        Interval::Line { .. } => {
            return Err(Error::Coefficient(
                "fundamental solution needs a finite interval".into(),
            ))
        }
    };
    if steps == 0 {
        return Err(Error::Grid("steps must be at least 1".into()));
    }
    let j = j_matrix(sys.n);
    let h = (b - a) / steps as f64;
    let mut grid = Vec::with_capacity(steps + 1);
    let mut mats = Vec::with_capacity(steps + 1);
    let mut g = eye(2 * sys.n);
    grid.push(a);
    mats.push(g.clone());
    for k in 0..steps {
        let t0 = a + k as f64 * h;
        let t1 = if k + 1 == steps { b } else { t0 + h };
        let bm = checked_b(&sys.b, 0.5 * (t0 + t1), sys.n)?;
        g = expm(&(&j * bm * c(t1 - t0))) * g;
        grid.push(t1);
        mats.push(g.clone());
    }
    Ok(FlowPath {
        n: sys.n,
        grid,
        mats,
        b: sys.b.clone(),
    })
}

/// min |Re λ| over σ(J B∞); hyperbolic iff it exceeds tol.
pub fn hyperbolicity_check(binf: &CMat, tol: f64) -> Result<(bool, f64)> {
    if binf.nrows() % 2 != 0 || binf.nrows() != binf.ncols() {
        return Err(Error::Dimension("B(±∞) must be 2n x 2n".into()));
    }
    let n = binf.nrows() / 2;
    let m = j_matrix(n) * binf;
    let ev = eigenvalues(&m);
    let gap = ev.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min);
    Ok((gap > tol, gap))
}

/// Unstable (Re > 0) or stable (Re < 0) spectral subspace of J B∞ as a Lagrangian frame.
pub fn spectral_subspace(binf: &CMat, unstable: bool) -> Result<LagrangianFrame> {
    let n = binf.nrows() / 2;
    let (ok, gap) = hyperbolicity_check(binf, 1e-10)?;
    if !ok {
        return Err(Error::Hyperbolicity(format!(
            "σ(JB) meets the imaginary axis (gap {gap:.3e})"
        )));
    }
    let m = j_matrix(n) * binf;
    let v = if unstable {
        invariant_subspace(&m, |z| z.re > 0.0)
    } else {
        invariant_subspace(&m, |z| z.re < 0.0)
    };
    lagrangian_from_frame(&v, 1e-8)
}

/// Smallest L ≥ 1 (doubling) with ‖B(±L) − B(±∞)‖ ≤ 1e-8.
pub fn default_truncation(b: &MatFn, b_minus: &CMat, b_plus: &CMat) -> f64 {
    let mut l = 1.0;
    while l < 1024.0 {
        if frob(&(b(l) - b_plus)) <= 1e-8 && frob(&(b(-l) - b_minus)) <= 1e-8 {
            return l;
        }
        l *= 1.25;
    }
    l
}

#[derive(Clone, Debug)]
pub struct FramePath {
    pub times: Vec<f64>,
    pub frames: Vec<LagrangianFrame>,
}

impl FramePath {
    pub fn at_zero(&self) -> &LagrangianFrame {
        let k = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap()
            .0;
        &self.frames[k]
    }
}

/// Propagate a subspace with re-orthonormalization at each step.
fn propagate_frame(
    n: usize,
    b: &MatFn,
    v0: &CMat,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<FramePath> {
    let j = j_matrix(n);
    let h = (t1 - t0) / steps as f64;
    let mut v = v0.clone();
    let mut times = vec![t0];
    let mut frames = vec![lagrangian_from_frame(&v, 1e-8)?];
    for k in 0..steps {
        let a = t0 + k as f64 * h;
        v = orth(&(step(&j, b, a, a + h) * v), 1e-13);
        let fr = lagrangian_from_frame(&v, 1e-8)?;
        if fr.isotropy_residual > 1e-10 {
            return Err(Error::NotLagrangian {
                residual: fr.isotropy_residual,
            });
        }
        times.push(a + h);
        frames.push(fr);
    }
    Ok(FramePath { times, frames })
}

/// V^u on [−L, 0] (forward from the unstable space of J B(−∞)) and
/// V^s on [0, L] (backward from the stable space of J B(+∞)).
pub fn stable_unstable_frames(
    sys: &HamiltonianSystem,
    l: f64,
    steps: usize,
) -> Result<(FramePath, FramePath)> {
    let (bm, bp) = match (&sys.b_minus, &sys.b_plus) {
        (Some(m), Some(p)) => (m, p),
        _ => return Err(Error::Coefficient("system has no limits at ±∞".into())),
    };
    let vu0 = spectral_subspace(bm, true)?;
    let vs0 = spectral_subspace(bp, false)?;
    let vu = propagate_frame(sys.n, &sys.b, &vu0.frame, -l, 0.0, steps)?;
    let mut vs = propagate_frame(sys.n, &sys.b, &vs0.frame, l, 0.0, steps)?;
    vs.times.reverse();
    vs.frames.reverse();
    Ok((vs, vu))
}

/// V^u(0) only; cheaper than the full path.
pub fn unstable_at_zero(n: usize, b: &MatFn, b_minus: &CMat, l: f64, steps: usize) -> Result<CMat> {
    let v = spectral_subspace(b_minus, true)?;
    Ok(orth(&(propagator(n, b, -l, 0.0, steps) * &v.frame), 1e-13))
}

/// V^s(0) only.
pub fn stable_at_zero(n: usize, b: &MatFn, b_plus: &CMat, l: f64, steps: usize) -> Result<CMat> {
    let v = spectral_subspace(b_plus, false)?;
    Ok(orth(&(propagator(n, b, l, 0.0, steps) * &v.frame), 1e-13))
}
