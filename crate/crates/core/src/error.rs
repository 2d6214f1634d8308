use thiserror::Error;

/// Errors produced by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("entry ({row}, {col}) is negative: {value}")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("entry ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("matrix is not square ({rows} x {cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,

    #[error("ragged matrix: row {row} has {found} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid space index: {0}")]
    InvalidSpaceIndex(String),

    #[error("{kind} sum {index} is {sum}, not 1 or 0")]
    NotStochastic {
        kind: &'static str,
        index: usize,
        sum: f64,
    },

    #[error("expected teaching dimension undefined: transmission index is zero")]
    EtdUndefined,

    #[error("concept {concept} is unteachable: its learner column is entirely zero")]
    UnteachableConcept { concept: usize },

    #[error("concept {concept} has an all-zero teacher column")]
    UnselectableConcept { concept: usize },

    #[error("undefined learner posterior: row {dataset} of L is entirely zero")]
    UndefinedPosterior { dataset: usize },

    #[error("entry ({row}, {col}) = {value} is not a probability")]
    ProbabilityOutOfRange { row: usize, col: usize, value: f64 },

    #[error("threshold {0} must lie strictly between 0 and 1")]
    InvalidThreshold(f64),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("malformed threshold problem: {0}")]
    MalformedProblem(String),

    #[error("matrix is entirely zero")]
    ZeroMatrix,

    #[error("invalid priors: {0}")]
    InvalidPriors(String),

    #[error("cooperative index requires uniform priors")]
    NonUniformPriors,

    #[error("no positive diagonal: the Sinkhorn limit does not exist for this pattern")]
    NoPositiveDiagonal,

    #[error("permanent of a {n} x {n} pattern is intractable (cap {cap})")]
    Intractable { n: usize, cap: usize },

    #[error("entry ({row}, {col}) is zero")]
    ZeroEntry { row: usize, col: usize },

    #[error("q = {0} is not supported (need q < 5/3)")]
    InvalidQ(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("no feasible fit: every grid point has zero likelihood")]
    NoFeasibleFit,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
