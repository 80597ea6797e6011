use maslov_core::sem::*;

#[test]
fn quadrature_integrates_polynomials() {
    let (x, w) = gauss_legendre(6);
    let s: f64 = w.iter().sum();
    assert!((s - 2.0).abs() < 1e-14);
    let i10: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
    assert!((i10 - 2.0 / 11.0).abs() < 1e-14);
}

#[test]
fn legendre_orthogonality() {
    let (x, w) = gauss_legendre(12);
    for j in 0..6 {
        for k in 0..6 {
            let s: f64 = x
                .iter()
                .zip(&w)
                .map(|(x, w)| {
                    let (v, _) = legendre(6, *x);
                    w * v[j] * v[k]
                })
                .sum();
            let want = if j == k { 2.0 / (2.0 * j as f64 + 1.0) } else { 0.0 };
            assert!((s - want).abs() < 1e-13);
        }
    }
}
