//! Dense complex linear algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[inline]
pub fn ci(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// e^{iθ}
#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::new(theta.cos(), theta.sin())
}

/// Row-major real data into a complex matrix.
pub fn real_mat(rows: usize, cols: usize, data: &[f64]) -> CMat {
    assert_eq!(data.len(), rows * cols);
    CMat::from_fn(rows, cols, |i, j| c(data[i * cols + j]))
}

pub fn diag_real(d: &[f64]) -> CMat {
    let mut m = CMat::zeros(d.len(), d.len());
    for (i, v) in d.iter().enumerate() {
        m[(i, i)] = c(*v);
    }
    m
}

pub fn diag_complex(d: &[C64]) -> CMat {
    let mut m = CMat::zeros(d.len(), d.len());
    for (i, v) in d.iter().enumerate() {
        m[(i, i)] = *v;
    }
    m
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Standard symplectic matrix [[0, -I], [I, 0]] of size 2n.
pub fn j_matrix(n: usize) -> CMat {
    let mut j = CMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = c(-1.0);
        j[(n + i, i)] = c(1.0);
    }
    j
}

/// Form matrix of the doubled space with -ω ⊕ ω.
pub fn doubled_j(n: usize) -> CMat {
    let j = j_matrix(n);
    block_diag(&[&(-&j), &j])
}

pub fn block_diag(blocks: &[&CMat]) -> CMat {
    let r: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cc: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut m = CMat::zeros(r, cc);
    let (mut i0, mut j0) = (0, 0);
    for b in blocks {
        m.view_mut((i0, j0), (b.nrows(), b.ncols())).copy_from(*b);
        i0 += b.nrows();
        j0 += b.ncols();
    }
    m
}

pub fn vstack(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.ncols());
    let mut m = CMat::zeros(a.nrows() + b.nrows(), a.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    m
}

pub fn hstack(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.nrows(), b.nrows());
    let mut m = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    m
}

pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Eigenvalues of a general complex matrix (Schur diagonal).
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let (_, t) = nalgebra::Schur::new(m.clone()).unpack();
    (0..m.nrows()).map(|i| t[(i, i)]).collect()
}

/// Largest singular value.
pub fn op_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5)
}

pub fn herm_residual(m: &CMat) -> f64 {
    frob(&(m - m.adjoint()))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn herm_eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let e = nalgebra::SymmetricEigen::new(hermitian_part(m));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].partial_cmp(&e.eigenvalues[b]).unwrap());
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, k| e.eigenvectors[(r, idx[k])]);
    (vals, vecs)
}

pub fn herm_eigvals(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = nalgebra::SymmetricEigen::new(hermitian_part(m))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Reduce the pencil (k, mass) to a standard Hermitian matrix L⁻¹ k L⁻*.
pub fn pencil_reduce(k: &CMat, mass: &CMat) -> Option<CMat> {
    let l = hermitian_part(mass).cholesky()?.l();
    let x = l.solve_lower_triangular(k)?;
    let y = l.solve_lower_triangular(&x.adjoint())?;
    Some(hermitian_part(&y))
}

pub fn inverse(m: &CMat) -> Option<CMat> {
    m.clone().try_inverse()
}

/// Orthonormal basis of the column space; singular values ≤ tol·σ_max are dropped.
pub fn orth(m: &CMat, tol: f64) -> CMat {
    if m.ncols() == 0 || m.nrows() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > tol * smax)
        .collect();
    let mut q = CMat::zeros(m.nrows(), keep.len());
    for (k, &i) in keep.iter().enumerate() {
        q.set_column(k, &u.column(i));
    }
    q
}

/// Numerical rank with the same relative cut as [`orth`].
pub fn rank(m: &CMat, tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&v| v > tol * smax).count(),
        _ => 0,
    }
}

/// Orthonormal basis of the orthogonal complement of span(q), q orthonormal.
pub fn complement(q: &CMat) -> CMat {
    let n = q.nrows();
    let p = eye(n) - q * q.adjoint();
    let (vals, vecs) = herm_eigh(&p);
    let cols: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.5).collect();
    let mut out = CMat::zeros(n, cols.len());
    for (k, &i) in cols.iter().enumerate() {
        out.set_column(k, &vecs.column(i));
    }
    out
}

/// Orthonormal basis of ker(m), rank decided at tol·σ_max.
pub fn null_space(m: &CMat, tol: f64) -> CMat {
    if m.nrows() == 0 {
        return eye(m.ncols());
    }
    let (r, n) = m.shape();
    if r < n {
        // Householder QR of m*; the trailing columns of the full Q span ker(m)
        let qr = m.adjoint().qr();
        let rd = qr.r().diagonal().map(|z| z.norm());
        let (lo, hi) = rd.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if hi > 0.0 && lo > 1e3 * tol * hi {
            let mut qt = eye(n);
            qr.q_tr_mul(&mut qt);
            return qt.rows(r, n - r).adjoint();
        }
    }
    let range_adj = orth(&m.adjoint(), tol);
    complement(&range_adj)
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm(a: &CMat) -> CMat {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let id = eye(n);
    // lower-degree Padé approximants where they already reach unit roundoff
    for (theta, b) in [
        (1.495585217958292e-2, &[120.0, 60.0, 12.0, 1.0][..]),
        (2.539398330063230e-1, &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0][..]),
        (9.504178996162932e-1, &[17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0][..]),
        (
            2.097847961257068,
            &[
                17643225600.0,
                8821612800.0,
                2075673600.0,
                302702400.0,
                30270240.0,
                2162160.0,
                110880.0,
                3960.0,
                90.0,
                1.0,
            ][..],
        ),
    ] {
        if norm1 <= theta {
            let a2 = a * a;
            let mut pw = id.clone();
            let mut u = CMat::zeros(n, n);
            let mut v = CMat::zeros(n, n);
            for k in 0..b.len() / 2 {
                v += &pw * c(b[2 * k]);
                u += &pw * c(b[2 * k + 1]);
                pw = &pw * &a2;
            }
            let u = a * u;
            return (&v - &u).lu().solve(&(&v + &u)).expect("Padé denominator singular");
        }
    }
    let theta13 = 5.371920351148152;
    let s = if norm1 > theta13 {
        (norm1 / theta13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * c(2f64.powi(-s));
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * c(B[13]) + &a4 * c(B[11]) + &a2 * c(B[9]))
        + &a6 * c(B[7])
        + &a4 * c(B[5])
        + &a2 * c(B[3])
        + &id * c(B[1]);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * c(B[12]) + &a4 * c(B[10]) + &a2 * c(B[8]))
        + &a6 * c(B[6])
        + &a4 * c(B[4])
        + &a2 * c(B[2])
        + &id * c(B[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Padé denominator singular");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Uniform random complex-free real matrix helper for tests and suites.
pub fn random_real(rng: &mut impl rand::Rng, rows: usize, cols: usize) -> CMat {
    use rand_distr::{Distribution, StandardNormal};
    CMat::from_fn(rows, cols, |_, _| c(StandardNormal.sample(rng)))
}

pub fn random_complex(rng: &mut impl rand::Rng, rows: usize, cols: usize) -> CMat {
    use rand_distr::{Distribution, StandardNormal};
    CMat::from_fn(rows, cols, |_, _| {
        ci(StandardNormal.sample(rng), StandardNormal.sample(rng))
    })
}

pub fn random_hermitian(rng: &mut impl rand::Rng, n: usize) -> CMat {
    let m = random_complex(rng, n, n);
    hermitian_part(&m)
}

pub fn random_real_symmetric(rng: &mut impl rand::Rng, n: usize) -> CMat {
    let m = random_real(rng, n, n);
    hermitian_part(&m)
}
