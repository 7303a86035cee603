use thiserror::Error;

/// Errors surfaced by the solver library.
#[derive(Debug, Error)]
pub enum QeoError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("projection matrix has real rank {rank}, expected {d}")]
    RankDeficient { rank: usize, d: usize },

    #[error("dense operator refused: {modes} modes exceed the guard of {guard}; use the matrix-free mode")]
    DenseGuardExceeded { modes: usize, guard: usize },

    #[error("operation requires a dense operator")]
    DenseRequired,

    #[error("index sets do not match: {0}")]
    IndexSetMismatch(String),

    #[error("matrix is not Hermitian: relative asymmetry {0:.3e}")]
    NotHermitian(f64),

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("preconditioner row norm vanishes at index {0}")]
    ZeroRowNorm(usize),

    #[error("coefficient field must be real-valued: {0}")]
    ComplexCoefficient(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("solve produced fewer than {wanted} usable pairs ({got})")]
    NotEnoughPairs { wanted: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QeoError>;
