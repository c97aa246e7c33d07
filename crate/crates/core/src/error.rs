use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("column for monomial {index} is identically zero and cannot be normalized")]
    ZeroColumn { index: String },

    #[error("normal-equation factorization failed (condition estimate {condition:e})")]
    Factorization { condition: f64 },

    #[error("non-finite iterate at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("stationary distribution did not converge (residual {residual:e})")]
    StationaryDistribution { residual: f64 },

    #[error("m = {m} is too small for blocking (m_alpha = 0)")]
    BlockingTooSmall { m: u64 },

    #[error("m = {m} is below the validity bound {bound} of the Markov chain inequality")]
    BelowValidityBound { m: u64, bound: f64 },

    #[error("m = {m} is too small: m*D must exceed {needed}")]
    SamplesTooSmall { m: u64, needed: f64 },

    #[error("NSP certification budget exceeded: {count} LPs > {budget}; use a smaller matrix or order")]
    BudgetExceeded { count: f64, budget: f64 },

    #[error("LP solver: {0}")]
    Lp(String),

    #[error("malformed input at {location}: {reason}")]
    Parse { location: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::DimensionMismatch { .. }
                | Error::ZeroColumn { .. }
                | Error::BlockingTooSmall { .. }
                | Error::BelowValidityBound { .. }
                | Error::SamplesTooSmall { .. }
                | Error::BudgetExceeded { .. }
                | Error::Parse { .. }
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}
