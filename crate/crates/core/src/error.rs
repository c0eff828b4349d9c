use thiserror::Error;

use crate::lp::LpError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TapError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("u and v coincide: the path from {0} to itself is empty")]
    EmptyPath(usize),
    #[error("unknown edge id {0}")]
    UnknownEdge(usize),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("size limit exceeded: {what} is {actual}, limit {limit}")]
    SizeLimit {
        what: &'static str,
        actual: usize,
        limit: usize,
    },
    #[error("shadow closure missing link {{{0},{1}}}")]
    Closure(usize, usize),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("lp: {0}")]
    Lp(#[from] LpError),
}

impl TapError {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            TapError::Infeasible(_) | TapError::Lp(LpError::Infeasible) => 2,
            TapError::SizeLimit { .. } => 3,
            TapError::Invariant(_) | TapError::Closure(..) => 4,
            _ => 1,
        }
    }
}

pub type Result<T, E = TapError> = std::result::Result<T, E>;

/// Bail out with an invariant violation when `cond` is false.
macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::TapError::Invariant(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
