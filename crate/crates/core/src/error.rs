use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QdiskError {
    #[error("index ({k}, {l}) outside window of size {dim}")]
    IndexOutOfWindow { k: usize, l: usize, dim: usize },
    #[error("support {needed} does not fit in window of size {dim}")]
    SupportOverflow { needed: usize, dim: usize },
    #[error("window sizes differ: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("symbol nearly vanishes: min |f| = {min_abs:e}")]
    NearZeroSymbol { min_abs: f64 },
    #[error("compatibility violated: residual {residual:e}")]
    CompatibilityViolation { residual: f64 },
    #[error("growth bound violated at ({n}, {j}): |beta| = {value:e} > {bound:e}")]
    GrowthViolation { n: i64, j: usize, value: f64, bound: f64 },
    #[error("ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("singular operator: smallest singular value {0:e}")]
    Singular(f64),
    #[error("contour too tight: spectral point at distance {distance:e} from circle")]
    ContourTooTight { distance: f64 },
    #[error("operand not self-adjoint: ||a - a*|| = {0:e}")]
    NotSelfAdjoint(f64),
    #[error("bad periodic extension: {0}")]
    BadExtension(String),
    #[error("spec violation: {0}")]
    SpecViolation(String),
    #[error("rank decision indeterminate: {0}")]
    Indeterminate(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, QdiskError>;
