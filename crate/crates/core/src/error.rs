use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("weight for record {record} is not finite ({value})")]
    NonFiniteWeight { record: String, value: f64 },

    #[error("noise scale must be positive, got {0}")]
    InvalidScale(f64),

    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),

    #[error("privacy budget exceeded for input {input}: spent {spent}, charge {charge}, cap {cap}")]
    BudgetExceeded {
        input: String,
        spent: f64,
        charge: f64,
        cap: f64,
    },

    #[error("no budget registered for input {0}")]
    UnknownInput(String),

    #[error("invalid query plan: {0}")]
    InvalidPlan(String),

    #[error("missing input dataset {0}")]
    MissingInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
