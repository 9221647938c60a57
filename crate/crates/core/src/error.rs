use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("vector has zero norm")]
    ZeroVector,

    #[error("not a projector: {0}")]
    NotProjector(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("unknown catalog channel `{0}`")]
    UnknownChannel(String),

    #[error("parameter `{name}` out of range: {value}")]
    ParameterOutOfRange { name: String, value: f64 },

    #[error("vectors are not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("capacity report has not converged (residual {0:.3e})")]
    NotConverged(f64),

    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
