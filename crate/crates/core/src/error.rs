use thiserror::Error;

/// Failure modes shared by every analysis in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("intersection form is singular")]
    SingularGram,

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("model rejected: {0}")]
    ModelRejected(String),

    #[error("point is indeterminate: {0}")]
    Indeterminate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degree drop: expected {expected} preimages, polynomial has degree {got}")]
    DegreeDrop { expected: usize, got: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("resource budget exceeded at step {step}: {what}")]
    Resource { step: usize, what: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("structural failure: {0}")]
    Structural(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case name of the variant, for machine-readable records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::SingularGram => "singular_gram",
            Error::HypothesisViolation(_) => "hypothesis_violation",
            Error::ModelRejected(_) => "model_rejected",
            Error::Indeterminate(_) => "indeterminate",
            Error::Unsupported(_) => "unsupported",
            Error::DegreeDrop { .. } => "degree_drop",
            Error::Numerical(_) => "numerical",
            Error::Resource { .. } => "resource",
            Error::Precondition(_) => "precondition",
            Error::Structural(_) => "structural",
            Error::InvalidInput(_) => "invalid_input",
        }
    }
}
