use thiserror::Error;

pub type Result<T> = std::result::Result<T, MemError>;

#[derive(Debug, Error)]
pub enum MemError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid trial data: {0}")]
    InvalidData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("exact enumeration is infeasible for {baskets} baskets (at most {max}); use the mcmc method")]
    TooManyBaskets { baskets: usize, max: usize },

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("degenerate samples: {0}")]
    Degenerate(String),

    #[error("{path}, line {line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl MemError {
    /// Errors caused by what the user asked for, as opposed to what happened at run time.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            MemError::InvalidConfig(_) | MemError::TooManyBaskets { .. } | MemError::Domain(_)
        )
    }
}
