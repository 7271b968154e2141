use alloc::string::String;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("edge probability {value} exceeds 1 for pair ({i}, {j})")]
    ProbabilityAboveOne { i: usize, j: usize, value: f64 },
    #[error("non-finite kernel value for pair ({i}, {j})")]
    NonFiniteKernel { i: usize, j: usize },
    #[error("matrix dimension {n} exceeds the enumeration cap {cap}")]
    AboveEnumerationCap { n: usize, cap: usize },
    #[error("non-finite entry in input at index {0}")]
    NonFiniteInput(usize),
    #[error("non-finite state at step {step}, particle {particle}")]
    NonFiniteState { step: usize, particle: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("model `{model}` lacks {what}")]
    MissingCapability { model: String, what: &'static str },
    #[error("stability condition violated: {0}")]
    Stability(String),
    #[error("time {t} is not on the grid")]
    OffGrid { t: f64 },
    #[error("dimension {dim} exceeds the tensor quadrature cap {cap}")]
    QuadratureDimension { dim: usize, cap: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
