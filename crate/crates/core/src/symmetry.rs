//! Symmetry operators on discretized spaces and the spectral-flow decomposition over F-groups.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::*;
use crate::spectral::{gauge, spectral_flow, DiscretizedOperator, HermitianPath, OperatorKind, SfOptions};
use crate::symplectic::{
    generalized_eigenspaces, group_spectral_pairs, is_anti_symplectic, is_symplectic, MatrixLikeDecomposition,
};

#[derive(Clone, Debug)]
pub enum SymmetrySpec {
    /// (gx)(t) = P x(t)
    PointwiseP { p: CMat },
    /// (gx)(t) = P x(t + T/k), with P S⁻¹ on the wrapped piece; boundary x(0) = S x(T)
    ZkShift { k: usize, p: CMat, s: CMat },
    /// (gx)(t) = N x(t0 + t1 − t)
    Brake { n: CMat },
    /// (gx)(t) = N x(−t) on a symmetric interval [−L, L]
    HeteroclinicBrake { n: CMat },
}

impl SymmetrySpec {
    pub fn name(&self) -> &'static str {
        match self {
            SymmetrySpec::PointwiseP { .. } => "pointwise-P",
            SymmetrySpec::ZkShift { .. } => "zk-shift",
            SymmetrySpec::Brake { .. } => "brake",
            SymmetrySpec::HeteroclinicBrake { .. } => "heteroclinic-brake",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiscreteSymmetry {
    pub case: &'static str,
    /// action on full coefficient vectors
    pub full: CMat,
    /// action in the orthonormal constrained coordinates
    pub g: CMat,
    pub g_adjoint: CMat,
    /// ‖(I − CC*) G C‖ / ‖G C‖
    pub preservation_residual: f64,
}

fn commutes_with_j(m: &CMat, n: usize) -> bool {
    let j = j_matrix(n);
    frob(&(m * &j - &j * m)) <= 1e-10 * frob(m).max(1.0)
}

fn anticommutes_with_j(m: &CMat, n: usize) -> bool {
    let j = j_matrix(n);
    frob(&(m * &j + &j * m)) <= 1e-10 * frob(m).max(1.0)
}

fn check_block(m: &CMat, d: usize, what: &str) -> Result<()> {
    if m.shape() != (d, d) {
        return Err(Error::Spec(format!("{what} must be {d}x{d}, got {:?}", m.shape())));
    }
    Ok(())
}

/// Realize g on the discretized space and certify that it preserves the constrained subspace.
pub fn build_symmetry(spec: &SymmetrySpec, disc: &DiscretizedOperator) -> Result<DiscreteSymmetry> {
    let d = disc.block;
    let m = disc.grid.elements;
    let p = disc.grid.degree;
    let ham = match disc.kind {
        OperatorKind::Hamiltonian { n, theta } => Some((n, theta)),
        OperatorKind::SturmLiouville { .. } => None,
    };
    // (source element, coefficient map for degree k) per target element
    let mut maps: Vec<(usize, Vec<CMat>)> = Vec::with_capacity(m);
    let mut condition = String::new();
    match spec {
        SymmetrySpec::PointwiseP { p: pm } => {
            check_block(pm, d, "P")?;
            if let Some((n, _)) = ham {
                if !is_symplectic(pm, 1e-10)? {
                    return Err(Error::Spec("P is not symplectic".into()));
                }
                if !commutes_with_j(pm, n) {
                    return Err(Error::Grid("pointwise action needs PJ = JP in the gauge basis".into()));
                }
            }
            for e in 0..m {
                maps.push((e, vec![pm.clone(); p + 1]));
            }
            condition.push_str("PΛ = Λ");
        }
        SymmetrySpec::ZkShift { k, p: pm, s } => {
            check_block(pm, d, "P")?;
            check_block(s, d, "S")?;
            if *k == 0 || m % k != 0 {
                return Err(Error::Grid(format!("shift order {k} must divide the element count {m}")));
            }
            if frob(&(pm * s - s * pm)) > 1e-10 * (frob(pm) * frob(s)).max(1.0) {
                return Err(Error::Spec("PS ≠ SP".into()));
            }
            if let Some((n, _)) = ham {
                if !is_symplectic(pm, 1e-10)? || !is_symplectic(s, 1e-10)? {
                    return Err(Error::Spec("P and S must be symplectic".into()));
                }
                if !commutes_with_j(pm, n) || !commutes_with_j(s, n) {
                    return Err(Error::Grid("shift action needs P, S commuting with J in the gauge basis".into()));
                }
            }
            let sinv = inverse(s).ok_or(Error::Singular { sigma_min: 0.0 })?;
            let wrap = pm * sinv;
            let q = m / k;
            for e in 0..m {
                if e + q < m {
                    maps.push((e + q, vec![pm.clone(); p + 1]));
                } else {
                    maps.push((e + q - m, vec![wrap.clone(); p + 1]));
                }
            }
            condition.push_str("x(0) = S x(T) with PS = SP");
        }
        SymmetrySpec::Brake { n: nm } | SymmetrySpec::HeteroclinicBrake { n: nm } => {
            check_block(nm, d, "N")?;
            if matches!(spec, SymmetrySpec::HeteroclinicBrake { .. }) && (disc.t0 + disc.t1).abs() > 1e-12 {
                return Err(Error::Spec(format!(
                    "heteroclinic brake needs a symmetric interval, got [{}, {}]",
                    disc.t0, disc.t1
                )));
            }
            let base = match ham {
                Some((n, theta)) => {
                    if !is_anti_symplectic(nm, 1e-10)? {
                        return Err(Error::Spec("N is not anti-symplectic".into()));
                    }
                    if !anticommutes_with_j(nm, n) {
                        return Err(Error::Grid("brake action needs NJ = −JN in the gauge basis".into()));
                    }
                    gauge(n, -theta) * nm
                }
                None => nm.clone(),
            };
            for e in 0..m {
                let per_k = (0..=p)
                    .map(|k| if k % 2 == 0 { base.clone() } else { -&base })
                    .collect();
                maps.push((m - 1 - e, per_k));
            }
            condition.push_str("NV₀ = V₁, NV₁ = V₀ (gΛ = Λ)");
        }
    }
    let size = disc.full_size();
    let mut full = CMat::zeros(size, size);
    for (e, (src, per_k)) in maps.iter().enumerate() {
        for (k, a) in per_k.iter().enumerate() {
            let (r, cc) = (disc.index(e, k, 0), disc.index(*src, k, 0));
            full.view_mut((r, cc), (d, d)).copy_from(a);
        }
    }
    let cb = &disc.basis;
    let gc = &full * cb;
    let g = cb.adjoint() * &gc;
    let resid = frob(&(&gc - cb * &g)) / frob(&gc).max(1e-300);
    if resid > 1e-8 {
        return Err(Error::Equivariance(format!(
            "{} action does not preserve the boundary condition ({condition} violated), residual {resid:.3e}",
            spec.name()
        )));
    }
    Ok(DiscreteSymmetry {
        case: spec.name(),
        g_adjoint: g.adjoint(),
        full,
        g,
        preservation_residual: resid,
    })
}

fn chebyshev(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let x = (std::f64::consts::PI * (2 * j + 1) as f64 / (2 * n) as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * x
        })
        .collect()
}

/// max over Chebyshev samples of ‖g*A(s)g − A(s)‖/‖A(s)‖ (mass included for pencils).
pub fn check_equivariance(g: &CMat, path: &HermitianPath, samples: usize, tol: f64) -> Result<(bool, f64)> {
    let mut worst: f64 = 0.0;
    let rel = |a: &CMat| frob(&(g.adjoint() * a * g - a)) / frob(a).max(1e-300);
    for s in chebyshev(path.a, path.b, samples.max(1)) {
        let a = path.raw(s)?;
        if a.shape() != g.shape() {
            return Err(Error::Dimension(format!("g is {:?}, A(s) is {:?}", g.shape(), a.shape())));
        }
        worst = worst.max(rel(&a));
    }
    if let Some(m) = &path.mass {
        worst = worst.max(rel(m));
    }
    Ok((worst <= tol, worst))
}

/// s ↦ U* A(s) U for an orthonormal U.
pub fn compress(path: &HermitianPath, u: &CMat) -> Result<HermitianPath> {
    let k = u.ncols();
    if frob(&(u.adjoint() * u - eye(k))) > 1e-10 * (k.max(1) as f64) {
        return Err(Error::Dimension("compression basis is not orthonormal".into()));
    }
    Ok(path.compressed(u))
}

#[derive(Clone, Debug, Serialize)]
pub struct AOrthogonalityReport {
    pub pairs_checked: usize,
    pub max_block: f64,
    pub kernel_dim: usize,
    pub kernel_split_dim: usize,
    pub ok: bool,
}

/// Blocks U_λ* A U_μ vanish when λ·conj(μ) ≠ 1, and ker A splits along the eigenspaces.
pub fn a_orthogonality_check(a: &CMat, dec: &MatrixLikeDecomposition, tol: f64) -> AOrthogonalityReport {
    let na = frob(a).max(1e-300);
    let mut pairs = 0;
    let mut worst: f64 = 0.0;
    for (i, li) in dec.eigenvalues.iter().enumerate() {
        for (j, lj) in dec.eigenvalues.iter().enumerate() {
            if (li * lj.conj() - c(1.0)).norm() <= 1e-6 {
                continue;
            }
            pairs += 1;
            let blk = dec.spaces[i].adjoint() * a * &dec.spaces[j];
            worst = worst.max(frob(&blk) / na);
        }
    }
    let ker = null_space(a, 1e-9);
    let kernel_dim = ker.ncols();
    let kernel_split_dim: usize = dec
        .spaces
        .iter()
        .map(|u| u.ncols() - rank(&(a * u), 1e-9))
        .sum();
    AOrthogonalityReport {
        pairs_checked: pairs,
        max_block: worst,
        kernel_dim,
        kernel_split_dim,
        ok: worst <= tol && kernel_dim == kernel_split_dim,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockFlow {
    pub eigenvalues: Vec<(f64, f64)>,
    pub dim: usize,
    pub sf: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub blocks: Vec<BlockFlow>,
    pub hat_dim: usize,
    pub hat_kernel_a: usize,
    pub hat_kernel_b: usize,
    /// ½(dim ker A(b)|_F̂ − dim ker A(a)|_F̂)
    pub hat_term: i64,
    pub total: i64,
    pub direct: i64,
    pub residual: i64,
    pub equivariance_residual: f64,
}

/// Split the spectral flow of a g-equivariant path along the F-groups of g.
pub fn decompose_spectral_flow(
    path: &HermitianPath,
    g: &CMat,
    eig_tol: f64,
    opts: &SfOptions,
) -> Result<DecompositionReport> {
    let (ok, eq) = check_equivariance(g, path, 9, 1e-8)?;
    if !ok {
        return Err(Error::Equivariance(format!("g*A(s)g ≠ A(s), residual {eq:.3e}")));
    }
    let dec = group_spectral_pairs(generalized_eigenspaces(g, eig_tol)?, eig_tol.max(1e-8))?;
    let on_circle: Vec<_> = dec.groups.iter().filter(|gr| gr.on_circle).collect();
    let blocks = {
        use rayon::prelude::*;
        on_circle
            .par_iter()
            .map(|gr| {
                let sub = compress(path, &gr.basis)?;
                Ok(BlockFlow {
                    eigenvalues: gr
                        .members
                        .iter()
                        .map(|&i| (dec.eigenvalues[i].re, dec.eigenvalues[i].im))
                        .collect(),
                    dim: gr.basis.ncols(),
                    sf: spectral_flow(&sub, opts)?.sf,
                })
            })
            .collect::<Result<Vec<_>>>()?
    };
    let hat_dim = dec.hat_f.ncols();
    let (hat_kernel_a, hat_kernel_b) = if hat_dim > 0 {
        let sub = compress(path, &dec.hat_f)?;
        let r = spectral_flow(&sub, opts)?;
        (r.kernel_a, r.kernel_b)
    } else {
        (0, 0)
    };
    let diff = hat_kernel_b as i64 - hat_kernel_a as i64;
    if diff % 2 != 0 {
        return Err(Error::TheoremViolation(format!(
            "odd kernel difference {diff} on the off-circle part"
        )));
    }
    let hat_term = diff / 2;
    let total = blocks.iter().map(|b| b.sf).sum::<i64>() + hat_term;
    let direct = spectral_flow(path, opts)?.sf;
    Ok(DecompositionReport {
        blocks,
        hat_dim,
        hat_kernel_a,
        hat_kernel_b,
        hat_term,
        total,
        direct,
        residual: direct - total,
        equivariance_residual: eq,
    })
}

/// Random g with prescribed spectrum and a random path satisfying g*A(s)g = A(s).
///
/// `circle` lists unit-circle eigenvalues with multiplicities, `hyperbolic` lists λ off the circle
/// (each paired with 1/conj(λ)). Hyperbolic couplings vanish at s = 0 when `kernel_at_start`.
pub fn random_compatible_family(
    rng: &mut impl Rng,
    circle: &[(C64, usize)],
    hyperbolic: &[(C64, usize)],
    kernel_at_start: bool,
    conditioning: f64,
) -> (CMat, HermitianPath) {
    let mut d: Vec<C64> = Vec::new();
    for &(l, mult) in circle {
        d.extend(std::iter::repeat_n(l / l.norm(), mult));
    }
    for &(l, mult) in hyperbolic {
        d.extend(std::iter::repeat_n(l, mult));
        d.extend(std::iter::repeat_n(c(1.0) / l.conj(), mult));
    }
    let dim = d.len();
    let v = eye(dim) + random_complex(rng, dim, dim) * c(conditioning / (dim as f64).sqrt());
    let vinv = inverse(&v).expect("perturbed identity is invertible");
    let g = &v * diag_complex(&d) * &vinv;
    let mask = CMat::from_fn(dim, dim, |i, j| {
        if (d[i].conj() * d[j] - c(1.0)).norm() < 1e-9 {
            c(1.0)
        } else {
            c(0.0)
        }
    });
    let hyper = CMat::from_fn(dim, dim, |i, j| {
        if (d[i].norm() - 1.0).abs() > 1e-9 || (d[j].norm() - 1.0).abs() > 1e-9 {
            c(1.0)
        } else {
            c(0.0)
        }
    });
    let x0 = hermitian_part(&random_complex(rng, dim, dim)).component_mul(&mask);
    let x1 = (hermitian_part(&random_complex(rng, dim, dim)) * c(3.0)).component_mul(&mask);
    let vi = vinv.clone();
    let path = HermitianPath::new(0.0, 1.0, move |s| {
        let circ = CMat::from_fn(dim, dim, |i, j| c(1.0) - hyper[(i, j)]);
        let weight = if kernel_at_start { s } else { 1.0 - s };
        let x = (&x0 + &x1 * c(s)).component_mul(&circ) + (&x0 + &x1).component_mul(&hyper) * c(weight);
        hermitian_part(&(vi.adjoint() * x * &vi))
    });
    (g, path)
}
