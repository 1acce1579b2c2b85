use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("truncation degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("linear part is singular (|det| = {det:.3e})")]
    SingularLinearPart { det: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("periodic orbit obstruction fails: {0}")]
    PooFailure(String),

    /// The linear-part cocycle is not reducible by bounded orbit products.
    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("orbit is not {delta0}-dense within {length} points (covering radius {radius})")]
    OrbitNotDense { delta0: f64, length: usize, radius: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
