use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("row {row}: value `{value}` is not a declared level of `{column}`")]
    UnknownLevel {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}: value `{value}` of `{column}` is not a finite number")]
    InvalidNumber {
        row: usize,
        column: String,
        value: String,
    },

    #[error(
        "response category `{0}` has no observations; merge it with a neighbouring category or drop it from the model"
    )]
    EmptyCategory(String),

    #[error("probability of observed category underflowed at observation {0}")]
    ProbabilityUnderflow(usize),

    #[error("parameter vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parameters violate the intercept ordering")]
    UnorderedIntercepts,

    #[error("constraint set is infeasible: {0}")]
    Infeasible(String),

    #[error("{0} direction-free ordinal predictors exceed the enumeration cap of {1}")]
    TooManyDirections(usize, usize),

    #[error("information matrix is singular (condition number {0:.3e})")]
    SingularInformation(f64),

    #[error("likelihood ratio statistic {0:.3e} is negative; the null fit is not nested in the full fit")]
    NotNested(f64),

    #[error("grid has {0} points, above the cap of {1}")]
    GridTooLarge(usize, usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("experiment failed: {0}")]
    Experiment(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
