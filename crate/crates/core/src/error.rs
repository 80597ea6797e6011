use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("degenerate frame: rank {rank}, expected {expected}")]
    DegenerateFrame { rank: usize, expected: usize },
    #[error("not Lagrangian: isotropy residual {residual:.3e}")]
    NotLagrangian { residual: f64 },
    #[error("matrix not invertible: smallest singular value {sigma_min:.3e}")]
    Singular { sigma_min: f64 },
    #[error("ambiguous eigenvalue clustering: gap {gap:.3e} at radius {radius:.3e}")]
    Clustering { gap: f64, radius: f64 },
    #[error("no partner for off-circle eigenvalue {re:.6}{im:+.6}i")]
    Pairing { re: f64, im: f64 },
    #[error("coefficient error: {0}")]
    Coefficient(String),
    #[error("boundary error: {0}")]
    Boundary(String),
    #[error("degenerate crossing at t = {t:.12}: crossing form eigenvalues {eigenvalues:?}")]
    DegenerateCrossing { t: f64, eigenvalues: Vec<f64> },
    #[error("crossing resolution error: {0}")]
    Resolution(String),
    #[error("kernel tolerance error: {0}")]
    Tolerance(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("equivariance error: {0}")]
    Equivariance(String),
    #[error("theorem violation: {0}")]
    TheoremViolation(String),
    #[error("fidelity error: {0}")]
    Fidelity(String),
    #[error("stabilization error: {0}")]
    Stabilization(String),
    #[error("truncation error: index {at_l} at L, {at_1_5l} at 1.5L")]
    Truncation { at_l: i64, at_1_5l: i64 },
    #[error("symmetry spec error: {0}")]
    Spec(String),
    #[error("hyperbolicity error: {0}")]
    Hyperbolicity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
