//! Legendre polynomials and Gauss–Legendre quadrature on [−1, 1].

/// Values L_0..L_p and derivatives at x.
pub fn legendre(p: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; p + 1];
    let mut d = vec![0.0; p + 1];
    v[0] = 1.0;
    if p >= 1 {
        v[1] = x;
        d[1] = 1.0;
    }
    for k in 1..p {
        let kf = k as f64;
        v[k + 1] = ((2.0 * kf + 1.0) * x * v[k] - kf * v[k - 1]) / (kf + 1.0);
        d[k + 1] = d[k - 1] + (2.0 * kf + 1.0) * v[k];
    }
    (v, d)
}

/// m-point Gauss–Legendre nodes and weights.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; m];
    let mut ws = vec![0.0; m];
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (v, d) = legendre(m, x);
            let dx = v[m] / d[m];
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, x);
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * d[m] * d[m]);
    }
    (xs, ws)
}
