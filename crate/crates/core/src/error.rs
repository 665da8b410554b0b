use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FracError {
    #[error("alpha must lie in (0,2), got {0}")]
    AlphaOutOfRange(f64),
    #[error("dimension n must be 2 or 3, got {0}")]
    UnsupportedDimension(usize),
    #[error("unknown catalog field `{0}`")]
    UnknownField(String),
    #[error("invalid arguments for `{field}`: {reason}")]
    BadArgs { field: String, reason: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("field is not in L_alpha or its tail cannot be modeled: {0}")]
    TailUnmodeled(String),
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("quadrature budget of {budget} evaluations exhausted (estimate {value:e} +/- {error:e})")]
    BudgetExhausted { budget: usize, value: f64, error: f64 },
    #[error("cannot fit a decay exponent: {0}")]
    Fit(String),
    #[error("periodization guard violated: max |g| = {0:e} in the outer shell")]
    PeriodizationGuard(f64),
    #[error("kernel constants have not been validated")]
    NotValidated,
    #[error("validation of kernel constants failed: {0}")]
    ValidationFailed(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, FracError>;
