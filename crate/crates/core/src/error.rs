use thiserror::Error;

/// Errors raised by constructors and operations on finite experiments.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two objects that must live on the same finite space do not.
    #[error("space mismatch: expected {expected}, found {found}")]
    SpaceMismatch { expected: String, found: String },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid Markov kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid loss: {0}")]
    InvalidLoss(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The linear program did not reach an optimal basis. The deficiency
    /// programs are always feasible and bounded, so this is an internal fault.
    #[error("linear program solver failed: {0}")]
    Solver(String),
}

impl Error {
    pub(crate) fn mismatch(expected: &crate::FiniteSpace, found: &crate::FiniteSpace) -> Self {
        Error::SpaceMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// True for errors that describe non-conforming spaces rather than
    /// malformed values.
    pub fn is_conformance(&self) -> bool {
        matches!(self, Error::SpaceMismatch { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
