use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("invalid convex body: {0}")]
    InvalidBody(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("rejection sampler exhausted after {attempts} attempts")]
    AttemptsExhausted { attempts: usize },
    #[error("degenerate configuration: points coincide or are too close")]
    DegenerateConfiguration,
    #[error("a configuration needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("arrival labels must be pairwise distinct")]
    DuplicateLabel,
    #[error("point lies outside the body")]
    PointOutsideBody,
    #[error("point does not lie in the Keep set")]
    PointNotInKeep,
    #[error("operation requires a bounded body")]
    UnboundedBody,
}
