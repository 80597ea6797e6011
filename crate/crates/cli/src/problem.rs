//! Problem files: declarative JSON documents, validated and resolved before dispatch.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use maslov_core::flow::{MatFn, TrigSeries};
use maslov_core::linalg::{c, ci};
use maslov_core::{CMat, C64};
use serde::{Deserialize, Serialize};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Sf,
    Maslov,
    Decompose,
    Bott,
    Brake,
    Heteroclinic,
    Homoclinic,
    Geodesic,
    VerifyAxioms,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Sf => "sf",
            Kind::Maslov => "maslov",
            Kind::Decompose => "decompose",
            Kind::Bott => "bott",
            Kind::Brake => "brake",
            Kind::Heteroclinic => "heteroclinic",
            Kind::Homoclinic => "homoclinic",
            Kind::Geodesic => "geodesic",
            Kind::VerifyAxioms => "verify-axioms",
        }
    }
}

/// Real rows, or separate real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Matrix {
    Real(Vec<Vec<f64>>),
    Complex { re: Vec<Vec<f64>>, im: Vec<Vec<f64>> },
}

impl Matrix {
    fn shape(rows: &[Vec<f64>]) -> Option<(usize, usize)> {
        let cols = rows.first().map_or(0, |r| r.len());
        rows.iter().all(|r| r.len() == cols).then_some((rows.len(), cols))
    }

    pub fn dims(&self) -> Option<(usize, usize)> {
        match self {
            Matrix::Real(r) => Matrix::shape(r),
            Matrix::Complex { re, im } => {
                let s = Matrix::shape(re)?;
                (Matrix::shape(im)? == s).then_some(s)
            }
        }
    }

    pub fn to_cmat(&self) -> CMat {
        match self {
            Matrix::Real(r) => CMat::from_fn(r.len(), r.first().map_or(0, |x| x.len()), |i, j| c(r[i][j])),
            Matrix::Complex { re, im } => {
                CMat::from_fn(re.len(), re.first().map_or(0, |x| x.len()), |i, j| ci(re[i][j], im[i][j]))
            }
        }
    }

    fn is_finite(&self) -> bool {
        let ok = |r: &Vec<Vec<f64>>| r.iter().flatten().all(|v| v.is_finite());
        match self {
            Matrix::Real(r) => ok(r),
            Matrix::Complex { re, im } => ok(re) && ok(im),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trig {
    pub period: f64,
    pub a0: Matrix,
    #[serde(default)]
    pub cos: Vec<Matrix>,
    #[serde(default)]
    pub sin: Vec<Matrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Samples {
    pub t: Vec<f64>,
    pub values: Vec<Matrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sech2 {
    pub matrix: Matrix,
    #[serde(default)]
    pub center: f64,
    #[serde(default = "one")]
    pub width: f64,
}

fn one() -> f64 {
    1.0
}

/// A matrix-valued function of one real variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Coefficient {
    Constant(Matrix),
    /// a0 + Σ a_k cos(2πkt/T) + b_k sin(2πkt/T)
    Trig(Trig),
    /// Σ c_k t^k
    Poly(Vec<Matrix>),
    /// piecewise linear through the samples, constant outside
    Samples(Samples),
    /// matrix · sech²((t − center)/width)
    Sech2(Sech2),
    Sum(Vec<Coefficient>),
}

impl Coefficient {
    /// Every matrix must be d×d; returns the offending sub-path on failure.
    fn check(&self, d: usize, path: &str) -> Result<(), ValidationError> {
        let mat = |m: &Matrix, p: String| -> Result<(), ValidationError> {
            match m.dims() {
                Some(s) if s == (d, d) => {}
                Some((r, k)) => return Err(ValidationError::new(p, format!("expected {d}x{d} matrix, got {r}x{k}"))),
                None => return Err(ValidationError::new(p, "ragged matrix rows")),
            }
            if !m.is_finite() {
                return Err(ValidationError::new(p, "non-finite entry"));
            }
            Ok(())
        };
        match self {
            Coefficient::Constant(m) => mat(m, format!("{path}.constant")),
            Coefficient::Trig(t) => {
                if !(t.period > 0.0 && t.period.is_finite()) {
                    return Err(ValidationError::new(format!("{path}.trig.period"), "must be positive"));
                }
                mat(&t.a0, format!("{path}.trig.a0"))?;
                for (i, m) in t.cos.iter().enumerate() {
                    mat(m, format!("{path}.trig.cos[{i}]"))?;
                }
                for (i, m) in t.sin.iter().enumerate() {
                    mat(m, format!("{path}.trig.sin[{i}]"))?;
                }
                Ok(())
            }
            Coefficient::Poly(cs) => {
                if cs.is_empty() {
                    return Err(ValidationError::new(format!("{path}.poly"), "needs at least one coefficient"));
                }
                for (i, m) in cs.iter().enumerate() {
                    mat(m, format!("{path}.poly[{i}]"))?;
                }
                Ok(())
            }
            Coefficient::Samples(s) => {
                if s.t.is_empty() || s.t.len() != s.values.len() {
                    return Err(ValidationError::new(
                        format!("{path}.samples"),
                        format!("{} times for {} values", s.t.len(), s.values.len()),
                    ));
                }
                if s.t.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(ValidationError::new(format!("{path}.samples.t"), "times must increase strictly"));
                }
                for (i, m) in s.values.iter().enumerate() {
                    mat(m, format!("{path}.samples.values[{i}]"))?;
                }
                Ok(())
            }
            Coefficient::Sech2(b) => {
                if !(b.width > 0.0) {
                    return Err(ValidationError::new(format!("{path}.sech2.width"), "must be positive"));
                }
                mat(&b.matrix, format!("{path}.sech2.matrix"))
            }
            Coefficient::Sum(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    p.check(d, &format!("{path}.sum[{i}]"))?;
                }
                Ok(())
            }
        }
    }

    pub fn constant_value(&self) -> Option<CMat> {
        match self {
            Coefficient::Constant(m) => Some(m.to_cmat()),
            _ => None,
        }
    }

    pub fn to_fn(&self, d: usize) -> MatFn {
        match self {
            Coefficient::Constant(m) => {
                let m = m.to_cmat();
                Arc::new(move |_| m.clone())
            }
            Coefficient::Trig(t) => TrigSeries {
                period: t.period,
                a0: t.a0.to_cmat(),
                cos: t.cos.iter().map(Matrix::to_cmat).collect(),
                sin: t.sin.iter().map(Matrix::to_cmat).collect(),
            }
            .to_fn(),
            Coefficient::Poly(cs) => {
                let cs: Vec<CMat> = cs.iter().map(Matrix::to_cmat).collect();
                Arc::new(move |t| cs.iter().rev().fold(CMat::zeros(d, d), |acc, m| acc * c(t) + m))
            }
            Coefficient::Samples(s) => {
                let ts = s.t.clone();
                let vs: Vec<CMat> = s.values.iter().map(Matrix::to_cmat).collect();
                Arc::new(move |t| {
                    let k = ts.partition_point(|&x| x <= t);
                    if k == 0 {
                        return vs[0].clone();
                    }
                    if k == ts.len() {
                        return vs[k - 1].clone();
                    }
                    let w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
                    &vs[k - 1] * c(1.0 - w) + &vs[k] * c(w)
                })
            }
            Coefficient::Sech2(b) => {
                let (m, t0, w) = (b.matrix.to_cmat(), b.center, b.width);
                Arc::new(move |t| &m * c(1.0 / ((t - t0) / w).cosh().powi(2)))
            }
            Coefficient::Sum(parts) => {
                let fs: Vec<MatFn> = parts.iter().map(|p| p.to_fn(d)).collect();
                Arc::new(move |t| fs.iter().fold(CMat::zeros(d, d), |acc, f| acc + f(t)))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Boundary {
    /// x(t0) = S x(t1)
    Graph { #[serde(rename = "S")] s: Matrix },
    /// x(t0) ∈ V0, x(t1) ∈ V1, each given by a 2n×n frame
    Separated {
        #[serde(rename = "V0")]
        v0: Matrix,
        #[serde(rename = "V1")]
        v1: Matrix,
    },
    /// x(t0) = ω P x(t1) with ω = e^{2πi·omega_turns}
    Twisted {
        #[serde(default)]
        omega_turns: f64,
        #[serde(rename = "P")]
        p: Matrix,
    },
    /// constant limits B(±∞), each shifted by λ·slope in λ-families
    HyperbolicEnds {
        minus: Matrix,
        plus: Matrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        minus_slope: Option<Matrix>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        plus_slope: Option<Matrix>,
    },
}

impl Boundary {
    fn name(&self) -> &'static str {
        match self {
            Boundary::Graph { .. } => "graph",
            Boundary::Separated { .. } => "separated",
            Boundary::Twisted { .. } => "twisted",
            Boundary::HyperbolicEnds { .. } => "hyperbolic-ends",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Symmetry {
    /// a unitary-like g acting on a matrix path
    Matrix { g: Matrix },
    /// (gx)(t) = P x(t + T/k)
    Shift {
        k: usize,
        #[serde(rename = "P")]
        p: Matrix,
    },
    /// (gx)(t) = N x(t0 + t1 − t), or N x(−t) on the line
    Brake {
        #[serde(rename = "N")]
        n: Matrix,
    },
}

impl Symmetry {
    fn name(&self) -> &'static str {
        match self {
            Symmetry::Matrix { .. } => "matrix",
            Symmetry::Shift { .. } => "shift",
            Symmetry::Brake { .. } => "brake",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_ktol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema: u32,
    pub kind: Kind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub coefficients: BTreeMap<String, Coefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Boundary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<Symmetry>,
    #[serde(default)]
    pub numerics: Numerics,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ValidationError {
    pub path: String,
    pub message: String,
}

impl ValidationError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ValidationError {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// A validated problem with every default filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub problem: ProblemFile,
    /// dotted paths of the fields that were filled with defaults
    pub defaults: Vec<String>,
}

pub fn read_problem(path: &Path) -> Result<ProblemFile, ValidationError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ValidationError::new("", format!("cannot read {}: {e}", path.display())))?;
    parse_problem_str(&text)
}

pub fn parse_problem_str(text: &str) -> Result<ProblemFile, ValidationError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ValidationError::new(if path == "." { String::new() } else { path }, e.inner().to_string())
    })
}

pub fn parse_problem(path: &Path, grid_scale: f64) -> Result<Resolved, ValidationError> {
    resolve(read_problem(path)?, grid_scale)
}

/// Operator problems act on ℂ^{2n}; matrix paths and Sturm–Liouville problems on ℂ^n.
fn coefficient_dim(kind: Kind, n: usize, matrix_path: bool) -> usize {
    match kind {
        Kind::Geodesic => n,
        _ if matrix_path => n,
        _ => 2 * n,
    }
}

fn is_matrix_path(p: &ProblemFile) -> bool {
    matches!(p.kind, Kind::Sf | Kind::Decompose) && p.coefficients.contains_key("A")
}

struct Filler<'a> {
    defaults: &'a mut Vec<String>,
}

impl Filler<'_> {
    fn fill<T: Copy>(&mut self, slot: &mut Option<T>, name: &str, value: T) -> T {
        if slot.is_none() {
            *slot = Some(value);
            self.defaults.push(name.to_string());
        }
        slot.unwrap()
    }
}

pub fn resolve(mut p: ProblemFile, grid_scale: f64) -> Result<Resolved, ValidationError> {
    if p.schema != SCHEMA {
        return Err(ValidationError::new("schema", format!("unsupported schema version {}", p.schema)));
    }
    if p.n == 0 {
        return Err(ValidationError::new("n", "must be at least 1"));
    }
    if !(grid_scale > 0.0 && grid_scale.is_finite()) {
        return Err(ValidationError::new("--grid-scale", "must be positive"));
    }
    let kind = p.kind;
    let mpath = is_matrix_path(&p);
    let d = coefficient_dim(kind, p.n, mpath);

    let (required, optional): (&[&str], &[&str]) = match kind {
        Kind::Sf | Kind::Decompose if mpath => (&["A"], &["mass"]),
        Kind::Sf | Kind::Maslov | Kind::Decompose => (&["B"], &["B0"]),
        Kind::Bott | Kind::Brake | Kind::Homoclinic => (&["B"], &[]),
        Kind::Heteroclinic => (&["B"], &["B0"]),
        Kind::Geodesic => (&["G", "R"], &[]),
        Kind::VerifyAxioms => (&[], &[]),
    };
    for name in required {
        if !p.coefficients.contains_key(*name) {
            return Err(ValidationError::new(format!("coefficients.{name}"), "missing"));
        }
    }
    for (name, coef) in &p.coefficients {
        if !required.contains(&name.as_str()) && !optional.contains(&name.as_str()) {
            return Err(ValidationError::new(
                format!("coefficients.{name}"),
                format!("not used by kind {}", kind.name()),
            ));
        }
        coef.check(d, &format!("coefficients.{name}"))?;
    }
    if kind == Kind::Geodesic && p.coefficients["G"].constant_value().is_none() {
        return Err(ValidationError::new("coefficients.G", "must be constant"));
    }

    // boundary
    let allowed: &[&str] = match kind {
        Kind::Sf | Kind::Decompose if mpath => &[],
        Kind::Sf | Kind::Maslov | Kind::Decompose => &["graph", "separated", "twisted"],
        Kind::Bott | Kind::Geodesic => &["twisted"],
        Kind::Brake => &["graph", "separated"],
        Kind::Heteroclinic | Kind::Homoclinic => &["hyperbolic-ends"],
        Kind::VerifyAxioms => &[],
    };
    match (&p.boundary, allowed.is_empty()) {
        (None, false) => {
            return Err(ValidationError::new(
                "boundary",
                format!("missing; kind {} needs one of {allowed:?}", kind.name()),
            ))
        }
        (Some(_), true) => {
            return Err(ValidationError::new("boundary", format!("not used by kind {}", kind.name())));
        }
        (Some(b), false) if !allowed.contains(&b.name()) => {
            return Err(ValidationError::new(
                "boundary.type",
                format!("{} not allowed for kind {}; expected one of {allowed:?}", b.name(), kind.name()),
            ));
        }
        _ => {}
    }
    if let Some(b) = &p.boundary {
        check_boundary(b, kind, p.n)?;
    }

    // symmetry
    let allowed: &[&str] = match kind {
        Kind::Decompose if mpath => &["matrix"],
        Kind::Decompose => &["shift", "brake"],
        Kind::Brake | Kind::Heteroclinic | Kind::Homoclinic => &["brake"],
        _ => &[],
    };
    match (&p.symmetry, allowed.is_empty()) {
        (None, false) => {
            return Err(ValidationError::new(
                "symmetry",
                format!("missing; kind {} needs one of {allowed:?}", kind.name()),
            ))
        }
        (Some(_), true) => {
            return Err(ValidationError::new("symmetry", format!("not used by kind {}", kind.name())));
        }
        (Some(s), false) if !allowed.contains(&s.name()) => {
            return Err(ValidationError::new(
                "symmetry.type",
                format!("{} not allowed for kind {}; expected one of {allowed:?}", s.name(), kind.name()),
            ));
        }
        _ => {}
    }
    if let Some(s) = &p.symmetry {
        let (m, field, want) = match s {
            Symmetry::Matrix { g } => (g, "symmetry.g", d),
            Symmetry::Shift { p: m, k } => {
                if *k < 2 {
                    return Err(ValidationError::new("symmetry.k", "shift order must be at least 2"));
                }
                (m, "symmetry.P", 2 * p.n)
            }
            Symmetry::Brake { n: m } => (m, "symmetry.N", 2 * p.n),
        };
        check_matrix(m, field, want, want)?;
        match (s, &p.boundary) {
            (Symmetry::Shift { .. }, Some(b @ Boundary::Separated { .. }))
            | (Symmetry::Brake { .. }, Some(b @ Boundary::Twisted { .. })) => {
                return Err(ValidationError::new(
                    "boundary.type",
                    format!("{} boundary not supported with {} symmetry", b.name(), s.name()),
                ));
            }
            _ => {}
        }
    }

    // interval and numerics
    let mut defaults = Vec::new();
    let line = matches!(kind, Kind::Heteroclinic | Kind::Homoclinic);
    let needs_interval = !(mpath || line || kind == Kind::VerifyAxioms);
    if needs_interval {
        if p.interval.is_none() {
            p.interval = Some([0.0, 2.0 * PI]);
            defaults.push("interval".to_string());
        }
        let [a, b] = p.interval.unwrap();
        if !(a < b && a.is_finite() && b.is_finite()) {
            return Err(ValidationError::new("interval", format!("need t0 < t1, got [{a}, {b}]")));
        }
        if matches!(kind, Kind::Bott | Kind::Geodesic | Kind::Brake | Kind::Decompose) && a != 0.0 {
            return Err(ValidationError::new("interval", "must start at 0 for this kind"));
        }
    } else if p.interval.is_some() {
        return Err(ValidationError::new("interval", format!("not used by kind {}", kind.name())));
    }

    let num = &mut p.numerics;
    let mut f = Filler { defaults: &mut defaults };
    let uses_grid = matches!(
        kind,
        Kind::Sf | Kind::Maslov | Kind::Decompose | Kind::Heteroclinic | Kind::Homoclinic | Kind::Geodesic
    ) && !mpath;
    let uses_steps = matches!(kind, Kind::Maslov | Kind::Bott | Kind::Brake | Kind::Heteroclinic);
    let uses_scan = matches!(kind, Kind::Maslov | Kind::Bott | Kind::Brake | Kind::Heteroclinic);
    let uses_ktol = !matches!(kind, Kind::Bott | Kind::Brake | Kind::VerifyAxioms);
    let uses_s = matches!(kind, Kind::Sf | Kind::Maslov | Kind::Decompose);
    let uses_iter = matches!(kind, Kind::Bott | Kind::Geodesic);
    let traced = matches!(kind, Kind::Sf | Kind::Maslov);

    let unused = |slot: bool, name: &str| -> Result<(), ValidationError> {
        if slot {
            return Err(ValidationError::new(
                format!("numerics.{name}"),
                format!("not used by kind {}", kind.name()),
            ));
        }
        Ok(())
    };
    if uses_grid {
        let (de, dd) = if kind == Kind::Geodesic { (8, 12) } else { (4, 16) };
        let e = f.fill(&mut num.elements, "numerics.elements", de);
        let g = f.fill(&mut num.degree, "numerics.degree", dd);
        if e == 0 {
            return Err(ValidationError::new("numerics.elements", "must be at least 1"));
        }
        if g < 2 {
            return Err(ValidationError::new("numerics.degree", "must be at least 2"));
        }
        let scaled = ((e as f64 * grid_scale).round() as usize).max(1);
        num.elements = Some(scaled);
    } else {
        unused(num.elements.is_some(), "elements")?;
        unused(num.degree.is_some(), "degree")?;
    }
    if uses_steps {
        let ds = match kind {
            Kind::Bott => 96,
            Kind::Heteroclinic => 480,
            _ => 400,
        };
        let s = f.fill(&mut num.steps, "numerics.steps", ds);
        if s == 0 {
            return Err(ValidationError::new("numerics.steps", "must be at least 1"));
        }
        num.steps = Some(((s as f64 * grid_scale).round() as usize).max(1));
    } else {
        unused(num.steps.is_some(), "steps")?;
    }
    if uses_scan {
        let s = f.fill(&mut num.scan_points, "numerics.scan_points", 256);
        if s < 8 {
            return Err(ValidationError::new("numerics.scan_points", "must be at least 8"));
        }
    } else {
        unused(num.scan_points.is_some(), "scan_points")?;
    }
    if uses_ktol {
        let k = f.fill(&mut num.rel_ktol, "numerics.rel_ktol", 1e-8);
        if !(k > 0.0 && k < 1.0) {
            return Err(ValidationError::new("numerics.rel_ktol", "must lie in (0, 1)"));
        }
    } else {
        unused(num.rel_ktol.is_some(), "rel_ktol")?;
    }
    if uses_s {
        let [a, b] = f.fill(&mut num.s_range, "numerics.s_range", [0.0, 1.0]);
        if !(a < b && a.is_finite() && b.is_finite()) {
            return Err(ValidationError::new("numerics.s_range", format!("need s0 < s1, got [{a}, {b}]")));
        }
    } else {
        unused(num.s_range.is_some(), "s_range")?;
    }
    if line {
        let l = f.fill(&mut num.truncation, "numerics.truncation", 8.0);
        if !(l > 0.0 && l.is_finite()) {
            return Err(ValidationError::new("numerics.truncation", "must be positive"));
        }
    } else {
        unused(num.truncation.is_some(), "truncation")?;
    }
    if uses_iter {
        let m = f.fill(&mut num.iterations, "numerics.iterations", 2);
        if m == 0 {
            return Err(ValidationError::new("numerics.iterations", "must be at least 1"));
        }
    } else {
        unused(num.iterations.is_some(), "iterations")?;
    }
    if kind == Kind::Geodesic {
        let s = f.fill(&mut num.s_start, "numerics.s_start", 1.0);
        if !(s > 0.0 && s.is_finite()) {
            return Err(ValidationError::new("numerics.s_start", "must be positive"));
        }
    } else {
        unused(num.s_start.is_some(), "s_start")?;
    }
    if traced {
        f.fill(&mut num.trace_samples, "numerics.trace_samples", 0);
    } else {
        unused(num.trace_samples.is_some(), "trace_samples")?;
    }
    if kind == Kind::VerifyAxioms {
        f.fill(&mut num.seed, "numerics.seed", 0);
        let c = f.fill(&mut num.count, "numerics.count", 100);
        if c == 0 {
            return Err(ValidationError::new("numerics.count", "must be at least 1"));
        }
    } else {
        unused(num.seed.is_some(), "seed")?;
        unused(num.count.is_some(), "count")?;
    }

    // grid pre-checks that would otherwise only surface mid-computation
    if let (Some(Symmetry::Shift { k, .. }), Some(m)) = (&p.symmetry, p.numerics.elements) {
        if m % k != 0 {
            return Err(ValidationError::new(
                "numerics.elements",
                format!("grid error: shift order {k} must divide the element count {m}"),
            ));
        }
    }
    Ok(Resolved { problem: p, defaults })
}

fn check_matrix(m: &Matrix, path: &str, rows: usize, cols: usize) -> Result<(), ValidationError> {
    match m.dims() {
        Some(s) if s == (rows, cols) => {}
        Some((r, k)) => {
            return Err(ValidationError::new(path, format!("expected {rows}x{cols} matrix, got {r}x{k}")));
        }
        None => return Err(ValidationError::new(path, "ragged matrix rows")),
    }
    if !m.is_finite() {
        return Err(ValidationError::new(path, "non-finite entry"));
    }
    Ok(())
}

fn check_boundary(b: &Boundary, kind: Kind, n: usize) -> Result<(), ValidationError> {
    let d = if kind == Kind::Geodesic { n } else { 2 * n };
    match b {
        Boundary::Graph { s } => check_matrix(s, "boundary.S", d, d),
        Boundary::Separated { v0, v1 } => {
            check_matrix(v0, "boundary.V0", d, n)?;
            check_matrix(v1, "boundary.V1", d, n)
        }
        Boundary::Twisted { p, omega_turns } => {
            if !omega_turns.is_finite() {
                return Err(ValidationError::new("boundary.omega_turns", "must be finite"));
            }
            check_matrix(p, "boundary.P", d, d)
        }
        Boundary::HyperbolicEnds {
            minus,
            plus,
            minus_slope,
            plus_slope,
        } => {
            check_matrix(minus, "boundary.minus", d, d)?;
            check_matrix(plus, "boundary.plus", d, d)?;
            if let Some(m) = minus_slope {
                check_matrix(m, "boundary.minus_slope", d, d)?;
            }
            if let Some(m) = plus_slope {
                check_matrix(m, "boundary.plus_slope", d, d)?;
            }
            if kind == Kind::Homoclinic && (minus != plus || minus_slope.is_some() || plus_slope.is_some()) {
                return Err(ValidationError::new(
                    "boundary",
                    "homoclinic problems need equal constant limits minus = plus",
                ));
            }
            Ok(())
        }
    }
}

pub fn omega(turns: f64) -> C64 {
    maslov_core::linalg::cis(2.0 * PI * turns)
}
