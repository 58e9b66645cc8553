use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SsmError {
    #[error("series contains a non-finite value at index {index}")]
    NonFiniteSeries { index: usize },

    #[error("parameter `{name}` contains a non-finite value")]
    NonFiniteParameter { name: &'static str },

    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("real-mode system has a non-zero imaginary part in `{name}`")]
    ImaginaryInRealMode { name: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("duplicate Vandermonde node {value} at positions {first} and {second}")]
    DuplicateNode {
        value: f64,
        first: usize,
        second: usize,
    },

    #[error("linear system is numerically singular (pivot {pivot:e} at column {column})")]
    SingularSystem { column: usize, pivot: f64 },

    #[error("loss became non-finite at step {step}")]
    NonFiniteLoss { step: usize },

    #[error("system does not {epsilon}-approximate the target (error {error})")]
    NotApproximating { epsilon: f64, error: f64 },
}

pub type Result<T> = std::result::Result<T, SsmError>;
