use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain size must be at least 2, got {0}")]
    DomainTooSmall(u32),

    #[error("arity must be at least 1")]
    ZeroArity,

    #[error("expected {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("value {value} is outside the domain 0..{size}")]
    OutOfDomain { value: u32, size: u32 },

    #[error("operations and relations must share a domain (got sizes {left} and {right})")]
    DomainMismatch { left: u32, right: u32 },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("table has {got} entries, expected {expected}")]
    TableLength { expected: u64, got: usize },

    #[error("operation with {entries} table entries is too large to materialise (limit {limit})")]
    TooLarge { entries: String, limit: u64 },

    #[error("enumeration needs {needed} column selections, budget is {budget}")]
    BudgetExceeded { needed: String, budget: u64 },

    #[error("not a near-unanimity candidate: arity {0} < 3")]
    NotNuCandidate(usize),

    #[error("operation is not a recognised row-indicator rule")]
    NotIndicator,

    #[error("relation is not a subrelation of the bundle's rho")]
    NotSubrelation,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown rule `{0}`")]
    UnknownRule(String),

    #[error("closure guard exceeded: {0}")]
    ClosureGuard(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Budget and guard exhaustion are "we could not decide", not "false".
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::BudgetExceeded { .. } | Error::ClosureGuard(_) | Error::TooLarge { .. }
        )
    }
}
