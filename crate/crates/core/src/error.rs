use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CensusError {
    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} refused: n = {n} exceeds the feasibility bound {bound}")]
    BoundExceeded {
        what: &'static str,
        n: usize,
        bound: usize,
    },

    #[error("root bracket [{lo}, {hi}] has no sign change (g(lo) = {g_lo:e}, g(hi) = {g_hi:e})")]
    NoSignChange {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error(
        "free-tree sampler hit the retry cap of {cap} rooted draws at n = {n}; \
         this indicates a bug, not bad luck"
    )]
    RetryCapExceeded { n: usize, cap: u64 },

    #[error("internal assertion failed: {0}")]
    Internal(String),
}

impl CensusError {
    /// Process exit code used by the `census` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            CensusError::InvalidTree(_) | CensusError::Parse { .. } | CensusError::InvalidInput(_) => 2,
            CensusError::BoundExceeded { .. } => 3,
            CensusError::NoSignChange { .. }
            | CensusError::RetryCapExceeded { .. }
            | CensusError::Internal(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CensusError>;
