//! Symplectic linear algebra: forms, Lagrangian frames, (anti-)symplectic
//! matrices, generalized eigenspaces of matrix-like operators and the gap metric.

use crate::error::{Error, Result};
use crate::linalg::*;
use rand::Rng;
use serde::Serialize;

/// ω(x, y) = (Jx, y) = y* J x on ℂ^{2n}.
#[derive(Clone, Debug)]
pub struct SymplecticForm {
    pub n: usize,
    pub j: CMat,
}

impl SymplecticForm {
    pub fn standard(n: usize) -> Self {
        SymplecticForm { n, j: j_matrix(n) }
    }

    /// (ℂ^{2n} ⊕ ℂ^{2n}, −ω ⊕ ω).
    pub fn doubled(n: usize) -> Self {
        SymplecticForm {
            n: 2 * n,
            j: doubled_j(n),
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn omega(&self, x: &CVec, y: &CVec) -> C64 {
        (y.adjoint() * &self.j * x)[(0, 0)]
    }
}

/// Orthonormal basis of a subspace together with its projector.
#[derive(Clone, Debug)]
pub struct Subspace {
    pub basis: CMat,
}

impl Subspace {
    pub fn from_basis(m: &CMat, tol: f64) -> Self {
        Subspace { basis: orth(m, tol) }
    }

    pub fn from_orthonormal(basis: CMat) -> Self {
        Subspace { basis }
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace {
            basis: CMat::zeros(ambient, 0),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient(&self) -> usize {
        self.basis.nrows()
    }

    pub fn projector(&self) -> CMat {
        &self.basis * self.basis.adjoint()
    }
}

/// A Lagrangian subspace stored through an orthonormal frame.
#[derive(Clone, Debug)]
pub struct LagrangianFrame {
    pub frame: CMat,
    pub isotropy_residual: f64,
}

impl LagrangianFrame {
    /// Validates `z` against the form matrix `j` (standard or doubled).
    pub fn new(z: &CMat, j: &CMat, tol: f64) -> Result<Self> {
        let d = z.nrows();
        if d % 2 != 0 || j.nrows() != d {
            return Err(Error::Dimension(format!(
                "frame has {} rows, form is {}x{}",
                d,
                j.nrows(),
                j.ncols()
            )));
        }
        let n = d / 2;
        if z.ncols() != n {
            return Err(Error::Dimension(format!(
                "Lagrangian frame in dimension {} needs {} columns, got {}",
                d,
                n,
                z.ncols()
            )));
        }
        let q = orth(z, 1e-10);
        if q.ncols() != n {
            return Err(Error::DegenerateFrame {
                rank: q.ncols(),
                expected: n,
            });
        }
        let residual = frob(&(q.adjoint() * j * &q));
        if residual > tol {
            return Err(Error::NotLagrangian { residual });
        }
        Ok(LagrangianFrame {
            frame: q,
            isotropy_residual: residual,
        })
    }

    pub fn ambient(&self) -> usize {
        self.frame.nrows()
    }

    pub fn subspace(&self) -> Subspace {
        Subspace::from_orthonormal(self.frame.clone())
    }

    /// Image under a linear map, re-validated against `j`.
    pub fn mapped(&self, m: &CMat, j: &CMat, tol: f64) -> Result<Self> {
        LagrangianFrame::new(&(m * &self.frame), j, tol)
    }
}

/// Lagrangian subspace of (ℂ^{2n}, ω) with the standard J.
pub fn lagrangian_from_frame(z: &CMat, tol: f64) -> Result<LagrangianFrame> {
    if z.nrows() % 2 != 0 {
        return Err(Error::Dimension(format!("odd ambient dimension {}", z.nrows())));
    }
    LagrangianFrame::new(z, &j_matrix(z.nrows() / 2), tol)
}

/// Lagrangian of the doubled space (−ω ⊕ ω) in ℂ^{4n}.
pub fn doubled_lagrangian(z: &CMat, tol: f64) -> Result<LagrangianFrame> {
    if z.nrows() % 4 != 0 {
        return Err(Error::Dimension(format!(
            "doubled-space frame needs 4n rows, got {}",
            z.nrows()
        )));
    }
    LagrangianFrame::new(z, &doubled_j(z.nrows() / 4), tol)
}

/// Frame [I; S] of Gr(S) = {(x, Sx)}.
pub fn graph_frame(s: &CMat) -> CMat {
    vstack(&eye(s.nrows()), s)
}

/// Gr(S) as a Lagrangian of the doubled space; requires S symplectic.
pub fn graph(s: &CMat, tol: f64) -> Result<LagrangianFrame> {
    doubled_lagrangian(&graph_frame(s), tol)
}

/// V0 × V1 as a Lagrangian of the doubled space.
pub fn separated(v0: &LagrangianFrame, v1: &LagrangianFrame, tol: f64) -> Result<LagrangianFrame> {
    let d = v0.ambient();
    let n = v0.frame.ncols();
    let mut z = CMat::zeros(2 * d, 2 * n);
    z.view_mut((0, 0), (d, n)).copy_from(&v0.frame);
    z.view_mut((d, n), (d, n)).copy_from(&v1.frame);
    doubled_lagrangian(&z, tol)
}

fn check_even_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() % 2 != 0 {
        return Err(Error::Dimension(format!(
            "expected a 2n x 2n matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows() / 2)
}

pub fn is_symplectic(m: &CMat, tol: f64) -> Result<bool> {
    let n = check_even_square(m)?;
    let j = j_matrix(n);
    Ok(frob(&(m.adjoint() * &j * m - &j)) <= tol * frob(&j))
}

pub fn is_anti_symplectic(m: &CMat, tol: f64) -> Result<bool> {
    let n = check_even_square(m)?;
    let j = j_matrix(n);
    Ok(frob(&(m.adjoint() * &j * m + &j)) <= tol * frob(&j))
}

/// Count of principal angles equal to zero, i.e. cosines within tol of 1.
pub fn intersection_dimension(l1: &LagrangianFrame, l2: &LagrangianFrame, tol: f64) -> Result<usize> {
    subspace_intersection_dim(&l1.frame, &l2.frame, tol)
}

pub fn subspace_intersection_dim(q1: &CMat, q2: &CMat, tol: f64) -> Result<usize> {
    if q1.nrows() != q2.nrows() {
        return Err(Error::Dimension("ambient dimensions differ".into()));
    }
    let s = singular_values(&(q1.adjoint() * q2));
    Ok(s.iter().filter(|&&v| v >= 1.0 - tol).count())
}

/// Orthonormal basis of span(q1) ∩ span(q2) for orthonormal q1, q2.
pub fn intersection_basis(q1: &CMat, q2: &CMat, tol: f64) -> CMat {
    let m = q1.adjoint() * q2;
    let svd = m.svd(true, false);
    let u = svd.u.unwrap();
    let cols: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] >= 1.0 - tol)
        .collect();
    let mut a = CMat::zeros(q1.ncols(), cols.len());
    for (k, &i) in cols.iter().enumerate() {
        a.set_column(k, &u.column(i));
    }
    q1 * a
}

/// Gap distance ‖P_U − P_V‖ in the operator norm.
pub fn gap_distance(u: &Subspace, v: &Subspace) -> f64 {
    if u.dim() == 0 && v.dim() == 0 {
        return 0.0;
    }
    op_norm(&(u.projector() - v.projector()))
}

#[derive(Clone, Debug)]
pub struct FGroup {
    /// Indices into the eigenvalue list.
    pub members: Vec<usize>,
    pub on_circle: bool,
    pub basis: CMat,
}

#[derive(Clone, Debug)]
pub struct MatrixLikeDecomposition {
    pub eigenvalues: Vec<C64>,
    /// Orthonormal basis of each generalized eigenspace.
    pub spaces: Vec<CMat>,
    pub groups: Vec<FGroup>,
    pub hat_f: CMat,
}

impl MatrixLikeDecomposition {
    pub fn ambient(&self) -> usize {
        self.spaces.first().map(|s| s.nrows()).unwrap_or(0)
    }

    pub fn index_of(&self, lambda: C64, tol: f64) -> Option<usize> {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| (l - lambda).norm() <= tol)
            .min_by(|a, b| {
                (a.1 - lambda)
                    .norm()
                    .partial_cmp(&(b.1 - lambda).norm())
                    .unwrap()
            })
            .map(|(i, _)| i)
    }
}

/// Swap adjacent diagonal entries k, k+1 of the upper-triangular t, updating q.
fn schur_swap(t: &mut CMat, q: &mut CMat, k: usize) {
    let d = t.nrows();
    let a = t[(k, k)];
    let b = t[(k + 1, k + 1)];
    let x0 = t[(k, k + 1)];
    let x1 = b - a;
    let nrm = (x0.norm_sqr() + x1.norm_sqr()).sqrt();
    if nrm == 0.0 {
        return;
    }
    let (al, be) = (x0 / nrm, x1 / nrm);
    // G = [[al, -conj(be)], [be, conj(al)]], first column is the b-eigenvector
    for r in 0..d {
        let u = t[(r, k)];
        let v = t[(r, k + 1)];
        t[(r, k)] = u * al + v * be;
        t[(r, k + 1)] = -u * be.conj() + v * al.conj();
        let u = q[(r, k)];
        let v = q[(r, k + 1)];
        q[(r, k)] = u * al + v * be;
        q[(r, k + 1)] = -u * be.conj() + v * al.conj();
    }
    for col in 0..d {
        let u = t[(k, col)];
        let v = t[(k + 1, col)];
        t[(k, col)] = al.conj() * u + be.conj() * v;
        t[(k + 1, col)] = -be * u + al * v;
    }
    t[(k + 1, k)] = C64::new(0.0, 0.0);
}

/// Orthonormal basis of the invariant subspace of m for the eigenvalues picked by `select`.
pub fn invariant_subspace(m: &CMat, select: impl Fn(C64) -> bool) -> CMat {
    let d = m.nrows();
    let (mut q, mut t) = nalgebra::Schur::new(m.clone()).unpack();
    let mut lab: Vec<bool> = (0..d).map(|i| select(t[(i, i)])).collect();
    let count = lab.iter().filter(|&&b| b).count();
    let mut target = 0;
    for i in 0..d {
        if lab[i] {
            let mut p = i;
            while p > target {
                schur_swap(&mut t, &mut q, p - 1);
                lab.swap(p - 1, p);
                p -= 1;
            }
            target += 1;
        }
    }
    q.columns(0, count).into_owned()
}

/// Generalized eigenspaces H_λ by Schur reordering; `tol` is the clustering radius
/// relative to ‖g‖ (the default used elsewhere is 1e-8).
pub fn generalized_eigenspaces(g: &CMat, tol: f64) -> Result<MatrixLikeDecomposition> {
    let d = g.nrows();
    if d != g.ncols() {
        return Err(Error::Dimension("g must be square".into()));
    }
    let s = singular_values(g);
    let smax = s.first().copied().unwrap_or(0.0);
    let smin = s.last().copied().unwrap_or(0.0);
    if smin <= tol * smax.max(1.0) {
        return Err(Error::Singular { sigma_min: smin });
    }
    let (q0, t0) = nalgebra::Schur::new(g.clone()).unpack();
    let diag: Vec<C64> = (0..d).map(|i| t0[(i, i)]).collect();
    let radius = tol * smax.max(1.0);

    // single-linkage clustering, merged transitively
    let mut label: Vec<usize> = (0..d).collect();
    fn find(l: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while l[r] != r {
            r = l[r];
        }
        let mut k = i;
        while l[k] != r {
            let nx = l[k];
            l[k] = r;
            k = nx;
        }
        r
    }
    for i in 0..d {
        for j in (i + 1)..d {
            if (diag[i] - diag[j]).norm() <= radius {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[a] = b;
                }
            }
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut cluster_of = vec![0usize; d];
    for i in 0..d {
        let r = find(&mut label, i);
        let pos = match roots.iter().position(|&x| x == r) {
            Some(p) => p,
            None => {
                roots.push(r);
                roots.len() - 1
            }
        };
        cluster_of[i] = pos;
    }
    let nc = roots.len();
    for a in 0..d {
        for b in 0..d {
            if cluster_of[a] != cluster_of[b] {
                let gap = (diag[a] - diag[b]).norm();
                if gap <= 10.0 * radius {
                    return Err(Error::Clustering { gap, radius });
                }
            }
        }
    }

    let mut eigenvalues = Vec::with_capacity(nc);
    let mut spaces = Vec::with_capacity(nc);
    for cl in 0..nc {
        let members: Vec<usize> = (0..d).filter(|&i| cluster_of[i] == cl).collect();
        let mean = members.iter().map(|&i| diag[i]).sum::<C64>() / c(members.len() as f64);
        let mut t = t0.clone();
        let mut q = q0.clone();
        let mut lab: Vec<bool> = (0..d).map(|i| cluster_of[i] == cl).collect();
        let mut target = 0;
        for i in 0..d {
            if lab[i] {
                let mut p = i;
                while p > target {
                    schur_swap(&mut t, &mut q, p - 1);
                    lab.swap(p - 1, p);
                    p -= 1;
                }
                target += 1;
            }
        }
        let basis = q.columns(0, members.len()).into_owned();
        eigenvalues.push(mean);
        spaces.push(basis);
    }
    let groups = Vec::new();
    Ok(MatrixLikeDecomposition {
        eigenvalues,
        spaces,
        groups,
        hat_f: CMat::zeros(d, 0),
    })
}

/// Fill F_λ groups: unit-circle singletons, off-circle pairs {λ, conj(λ)⁻¹}.
pub fn group_spectral_pairs(mut dec: MatrixLikeDecomposition, tol: f64) -> Result<MatrixLikeDecomposition> {
    let k = dec.eigenvalues.len();
    let d = dec.ambient();
    let mut used = vec![false; k];
    let mut groups = Vec::new();
    let mut off_cols: Vec<CMat> = Vec::new();
    for i in 0..k {
        if used[i] {
            continue;
        }
        let l = dec.eigenvalues[i];
        if (l.norm() - 1.0).abs() <= tol {
            used[i] = true;
            groups.push(FGroup {
                members: vec![i],
                on_circle: true,
                basis: dec.spaces[i].clone(),
            });
            continue;
        }
        let partner = c(1.0) / l.conj();
        let best = (0..k)
            .filter(|&j| j != i && !used[j])
            .min_by(|&a, &b| {
                (dec.eigenvalues[a] - partner)
                    .norm()
                    .partial_cmp(&(dec.eigenvalues[b] - partner).norm())
                    .unwrap()
            });
        let j = match best {
            Some(j) if (dec.eigenvalues[j] - partner).norm() <= tol * partner.norm().max(1.0) => j,
            _ => return Err(Error::Pairing { re: l.re, im: l.im }),
        };
        used[i] = true;
        used[j] = true;
        let b = orth(&hstack(&dec.spaces[i], &dec.spaces[j]), 1e-12);
        off_cols.push(b.clone());
        groups.push(FGroup {
            members: vec![i, j],
            on_circle: false,
            basis: b,
        });
    }
    let mut hat = CMat::zeros(d, 0);
    for b in &off_cols {
        hat = hstack(&hat, b);
    }
    dec.hat_f = orth(&hat, 1e-12);
    dec.groups = groups;
    Ok(dec)
}

#[derive(Clone, Debug, Serialize)]
pub struct AntiSymplecticPair {
    pub lambda: (f64, f64),
    pub partner: (f64, f64),
    pub algebraic: (usize, usize),
    pub geometric: (usize, usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct AntiSymplecticReport {
    pub pairs: Vec<AntiSymplecticPair>,
    pub multiplicities_match: bool,
    pub max_j_residual: f64,
    pub j_orthogonal: bool,
}

/// Eigenvalue pairing λ ↔ −conj(λ)⁻¹ and J-orthogonality of generalized eigenspaces.
pub fn anti_symplectic_spectrum_check(nm: &CMat, tol: f64) -> Result<AntiSymplecticReport> {
    let n = check_even_square(nm)?;
    if !is_anti_symplectic(nm, 1e-8)? {
        return Err(Error::Spec("matrix is not anti-symplectic".into()));
    }
    let j = j_matrix(n);
    let dec = generalized_eigenspaces(nm, 1e-8)?;
    let k = dec.eigenvalues.len();
    let geom = |l: C64| -> usize {
        let m = nm - eye(2 * n) * l;
        2 * n - rank(&m, 1e-9)
    };
    let mut pairs = Vec::new();
    let mut ok = true;
    for i in 0..k {
        let l = dec.eigenvalues[i];
        let p = -c(1.0) / l.conj();
        let found = dec.index_of(p, tol.max(1e-8) * p.norm().max(1.0));
        match found {
            Some(jx) => {
                let alg = (dec.spaces[i].ncols(), dec.spaces[jx].ncols());
                let ge = (geom(l), geom(dec.eigenvalues[jx]));
                if alg.0 != alg.1 || ge.0 != ge.1 {
                    ok = false;
                }
                pairs.push(AntiSymplecticPair {
                    lambda: (l.re, l.im),
                    partner: (p.re, p.im),
                    algebraic: alg,
                    geometric: ge,
                });
            }
            None => {
                ok = false;
                pairs.push(AntiSymplecticPair {
                    lambda: (l.re, l.im),
                    partner: (p.re, p.im),
                    algebraic: (dec.spaces[i].ncols(), 0),
                    geometric: (geom(l), 0),
                });
            }
        }
    }
    let mut max_res: f64 = 0.0;
    for a in 0..k {
        for b in 0..k {
            let prod = dec.eigenvalues[a] * dec.eigenvalues[b].conj();
            if (prod + c(1.0)).norm() > 1e-6 {
                let r = op_norm(&(dec.spaces[b].adjoint() * &j * &dec.spaces[a]));
                max_res = max_res.max(r);
            }
        }
    }
    Ok(AntiSymplecticReport {
        pairs,
        multiplicities_match: ok,
        max_j_residual: max_res,
        j_orthogonal: max_res <= tol,
    })
}

/// Random real symplectic matrix: product of exp(J S_k) with symmetric S_k.
pub fn random_symplectic(rng: &mut impl Rng, n: usize, scale: f64, factors: usize) -> CMat {
    let j = j_matrix(n);
    let mut m = eye(2 * n);
    for _ in 0..factors {
        let s = random_real_symmetric(rng, 2 * n) * c(scale);
        m = expm(&(&j * s)) * m;
    }
    m
}

/// Random symplectic matrix of the doubled space (−ω ⊕ ω).
pub fn random_doubled_symplectic(rng: &mut impl Rng, n: usize, scale: f64) -> CMat {
    let jd = doubled_j(n);
    let s = random_real_symmetric(rng, 4 * n) * c(scale);
    expm(&(&jd * s))
}

/// diag(I_n, −I_n), the standard anti-symplectic involution.
pub fn standard_reflection(n: usize) -> CMat {
    let mut d = vec![1.0; n];
    d.extend(std::iter::repeat_n(-1.0, n));
    diag_real(&d)
}

pub fn random_anti_symplectic(rng: &mut impl Rng, n: usize, scale: f64) -> CMat {
    standard_reflection(n) * random_symplectic(rng, n, scale, 2)
}
