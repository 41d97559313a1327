use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("infeasible schedule at entry {index}: {reason}")]
    InfeasibleSchedule { index: usize, reason: String },

    #[error("word prefix too short: need at least {needed} letters, have {have}")]
    InsufficientPrefix { needed: usize, have: usize },

    #[error("invalid digit path: {0}")]
    InvalidPath(String),

    #[error("scale error: {0}")]
    Scale(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error(
        "no realization survived to depth {depth} after {retries} attempts \
         (survival probability to that depth {survival:.6}, non-extinction probability {p_noext:.6})"
    )]
    RetriesExhausted {
        depth: usize,
        retries: u64,
        survival: f64,
        p_noext: f64,
    },

    #[error("spec error: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
