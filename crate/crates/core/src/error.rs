use crate::model::ValidationReport;
use crate::rational::Rational;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("task index {index} out of range 1..={n}")]
    TaskIndex { index: usize, n: usize },

    #[error("invalid task set: {0}")]
    InvalidTaskSet(ValidationReport),

    #[error("execution time of task {task} is missing")]
    MissingWcet { task: usize },

    #[error("execution time {value} is negative")]
    NegativeWcet { value: Rational },

    #[error("reduced schedulability points require deadline-monotonic order among tasks 1..={task}")]
    NotDeadlineMonotonic { task: usize },

    #[error("this analysis requires constrained deadlines; use the arbitrary-deadline test")]
    ArbitraryDeadlines,

    #[error("region is unbounded along C_{coord}")]
    UnboundedRegion { coord: usize },

    #[error("region is infeasible")]
    InfeasibleRegion,

    #[error("vertex enumeration supports at most 3 dimensions, got {0}")]
    DimensionTooLarge(usize),

    #[error("SVG export supports only 2 dimensions, got {0}")]
    SvgDimension(usize),

    #[error("horizon must be positive, got {0}")]
    NonPositiveHorizon(Rational),

    #[error("horizon {horizon} exceeds the configured cap {cap}")]
    HorizonTooLarge { horizon: Box<Rational>, cap: Box<Rational> },

    #[error("invalid experiment configuration: {0}")]
    Config(String),

    #[error("task-set file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
