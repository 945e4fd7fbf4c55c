//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Amplitudes do not square-sum to 1.
    #[error("state is not normalized: squared norm = {norm}")]
    Normalization { norm: f64 },

    /// A requested dimension does not fit the hosting space.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A parameter violates its documented constraint.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An enumeration would exceed the configured capacity.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The requested reduction is already complete (q = 0 precursor).
    #[error("no-op: {0}")]
    NoOp(String),

    /// A case-specific precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A tolerance is too tight for the computation to make progress.
    #[error("tolerance error: {0}")]
    Tolerance(String),

    /// A strategy was executed on a state with a different Schmidt spectrum.
    #[error("state mismatch: {0}")]
    StateMismatch(String),

    /// Numerical linear algebra failed to converge.
    #[error("linear algebra failure: {0}")]
    Linalg(String),

    /// Input artifact (JSON state, config) is malformed.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
