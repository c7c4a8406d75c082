use std::io;

use thiserror::Error;

/// Errors produced by the mining, simulation and significance APIs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    /// Malformed input data; `line` is 1-based where known.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The independence model produced a per-tick probability outside [0, 1],
    /// typically because rate * delta_t (or its product across constituents
    /// spread over the expiry window) is too large.
    #[error("invalid probability: {0}")]
    InvalidProbability(String),

    /// Rate estimation over a zero-duration or sourceless sequence.
    #[error("undefined rate: sequence has no duration or no sources")]
    UndefinedRate,

    /// An API precondition was violated by the caller.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Pattern enumeration hit a window with too many distinct types while
    /// effectively unbounded in pattern size.
    #[error(
        "pattern enumeration aborted: window at tick {tick} holds {distinct} distinct \
         types (cap {cap}); lower the pattern size or raise the window cap"
    )]
    ExplosionGuard {
        tick: u64,
        distinct: usize,
        cap: usize,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
