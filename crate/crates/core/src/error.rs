use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("vector must have at least one coordinate")]
    EmptyVector,

    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },

    #[error("zero vector has no supporting functional")]
    ZeroSupport,

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("invalid norm model: {0}")]
    InvalidModel(String),

    #[error("basis vectors are linearly dependent (singular value ratio {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("invalid subspace: {0}")]
    InvalidSubspace(String),

    #[error("best approximation did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },

    #[error("malformed block layout: {0}")]
    BlockLayout(String),

    #[error(
        "no non-linear complement found above threshold {threshold:e} \
         (best residual {best:e} over {directions} directions)"
    )]
    NoNonlinearComplement {
        threshold: f64,
        best: f64,
        directions: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
