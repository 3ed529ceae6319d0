use thiserror::Error;

/// Errors raised by the library. Failures that are part of a normal outcome
/// (a lost EF game, a metric violation list) are data, not errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid space parameters: {0}")]
    InvalidSpace(String),
    #[error("point does not belong to the space: {0}")]
    MismatchedSpace(String),
    #[error("degenerate triple: arguments must be pairwise distinct")]
    DegenerateTriple,
    #[error("space has no uniformly distributed measure")]
    NotUniform,
    #[error("operation not supported for this space: {0}")]
    UnsupportedSpace(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("rejection budget of {0} draws exceeded")]
    RejectionBudgetExceeded(usize),
    #[error("sample is empty")]
    EmptySample,
    #[error("vertex index {index} out of range for {len} vertices")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("graph has no coordinates")]
    MissingCoordinates,

    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("structure has no oracle for relation {0}")]
    MissingOracle(&'static str),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("formula must have exactly one free variable, found {0:?}")]
    FreeVariableCount(Vec<String>),

    #[error("invalid probe: {0}")]
    InvalidProbe(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("vertices {0} and {1} are not B-adjacent")]
    NotBAdjacent(usize, usize),
    #[error("no orienting loop found: {0}")]
    LoopNotFound(String),
    #[error("finite-sample approximation failed: {0}")]
    ApproximationFailure(String),

    #[error("witness set is empty")]
    EmptyWitnessSet,
    #[error("snap failure: {0}")]
    SnapFailure(String),
    #[error("enumeration budget exceeded: {needed} > {limit}")]
    BudgetExceeded { needed: f64, limit: f64 },

    #[error("no duplicator witness in the target arc")]
    WitnessNotFound,
    #[error("map is not {0}-elementary")]
    NotElementary(u32),

    #[error("not a Katetov function: violated at ({0}, {1})")]
    NotKatetov(usize, usize),
    #[error("non-positive epsilon for point {0}")]
    NonPositiveEpsilon(usize),
    #[error("integer distance between {0} and {1}")]
    IntegerDistanceInY(usize, usize),
    #[error("invalid metric space: {0}")]
    InvalidMetric(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
