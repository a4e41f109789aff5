use crate::nccm::ConfigIndex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid boson cutoff n_b = {0}; must be at least 1")]
    InvalidCutoff(usize),

    #[error("operation needs a two-level factor but the space has none")]
    SpinRequired,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("oracle precondition violated: matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("state is not normalized (norm {norm:.6})")]
    NotNormalized { norm: f64 },

    #[error("SUB-{level} truncation overflows the boson cutoff n_b = {n_b}")]
    TruncationOverflow { level: usize, n_b: usize },

    #[error("truncation level must be at least 1")]
    InvalidLevel,

    #[error("configuration {0} is outside the retained set")]
    IndexOutOfSet(ConfigIndex),

    #[error("precondition violated: operator is not nilpotent")]
    NotNilpotent,

    #[error("state is orthogonal to the reference state")]
    OrthogonalReference,

    #[error("bra and ket are not biorthonormal (<bra|ket> = {overlap})")]
    NotBiorthonormal { overlap: num_complex::Complex64 },

    #[error("integration diverged at t = {t}: amplitude norm {norm:.3e} (last good t = {last_good_t})")]
    Divergence { t: f64, last_good_t: f64, norm: f64 },

    #[error("singular operator (condition number {condition:.3e})")]
    Singular { condition: f64 },

    #[error("stationary point has not converged")]
    NotConverged,

    #[error("observability precondition violated: Q†Θ − ΘQ has norm {defect:.3e}")]
    ObservabilityPrecondition { defect: f64 },

    #[error("invalid integrator settings: {0}")]
    InvalidIntegrator(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
