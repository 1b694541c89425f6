use thiserror::Error;

/// Errors shared across the library.
///
/// `Usage` marks caller mistakes (mixed lines, unsorted divisions, ...),
/// `Precondition` marks operations applied outside their stated domain,
/// `Nonconvergence` carries the last bracket/estimate of an iterative
/// procedure that failed to stabilize, and `Capacity` guards the
/// brute-force oracles.
#[derive(Debug, Error)]
pub enum KsError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("did not converge: {0}")]
    Nonconvergence(String),
    #[error("representation error: {0}")]
    Representation(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
}

pub type Result<T> = std::result::Result<T, KsError>;
