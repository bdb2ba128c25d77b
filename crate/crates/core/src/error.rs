use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("element is not invertible")]
    NotInvertible,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("random combination failed to separate characters after {attempts} attempts")]
    GenericityFailure { attempts: usize },

    #[error("unknown point index {0}")]
    UnknownPoint(usize),

    #[error("space has no metric")]
    MissingMetric,

    #[error("space has no planar coordinates")]
    MissingCoords,

    #[error("pole {pole} collides with sample point {point}")]
    PoleCollision { pole: String, point: usize },

    #[error("invalid radii: {0}")]
    InvalidRadii(String),

    #[error("empty sample: {0}")]
    EmptySample(String),

    #[error("degenerate witness family: {0}")]
    Degenerate(String),

    #[error("normalization violated: {0}")]
    NormalizationViolated(String),

    #[error("function system is not closed under products: {0}")]
    NotClosed(String),

    #[error("invalid function system: {0}")]
    InvalidSystem(String),

    #[error("linear program failed: {0}")]
    Solver(String),

    #[error("parse error: {0}")]
    Parse(String),
}
