use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("query budget of {budget} exhausted")]
    BudgetExceeded { budget: usize },

    #[error("one-time memory already consumed")]
    AlreadyConsumed,

    #[error("token rejected an honestly measured key")]
    HonestRejected,

    #[error("verification failed on constraint `{constraint}`: {detail}")]
    Verification { constraint: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
