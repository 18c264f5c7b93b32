use alloc::boxed::Box;
use alloc::string::String;

/// Errors produced by the estimation library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("soft labels are missing; run distillation to produce them from hard labels")]
    MissingSoftLabels,
    #[error("degenerate index: the index values have zero or non-finite spread")]
    DegenerateIndex,
    #[error("invalid candidate: cannot project the zero vector onto the unit sphere")]
    ZeroVector,
    #[error("link function is singular at u = {0}")]
    Singularity(f64),
    #[error("labels contain a single class")]
    SingleClass,
    #[error("no usable evaluation points")]
    EmptyGrid,
    #[error("{failed} of {total} bootstrap refits failed")]
    TooManyFailures { failed: usize, total: usize },
    #[error("{context}: {source}")]
    Context {
        context: &'static str,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn context(self, context: &'static str) -> Self {
        Error::Context {
            context,
            source: Box::new(self),
        }
    }

    /// The innermost error, with any context layers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
