use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("telemetry input is empty")]
    EmptyInput,

    #[error("line {line}: expected {expected} fields, found {found}")]
    Arity {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: column `{column}`: cannot parse `{value}` as {expected}")]
    BadValue {
        line: u64,
        column: String,
        value: String,
        expected: &'static str,
    },

    #[error("line {line}: column `{column}` has a missing value")]
    MissingValue { line: u64, column: String },

    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),

    #[error("column `{name}` has {found} values, expected {expected}")]
    ColumnLength {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{variable}` has no state `{state}`")]
    UnknownState { variable: String, state: String },

    #[error("state index {index} out of range for `{variable}` ({cardinality} states)")]
    StateOutOfRange {
        variable: String,
        index: usize,
        cardinality: usize,
    },

    #[error("invalid variable metadata for `{variable}`: {reason}")]
    InvalidMeta { variable: String, reason: String },

    #[error("column `{column}` has {found} distinct categories, more than the limit of {limit}")]
    TooManyCategories {
        column: String,
        found: usize,
        limit: usize,
    },

    #[error("invalid discretization policy: {0}")]
    InvalidPolicy(String),

    #[error("edge {from} -> {to} would create a cycle")]
    Cycle { from: String, to: String },

    #[error("self-loop on `{0}`")]
    SelfLoop(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("variable sets overlap on `{0}`")]
    OverlappingSets(String),

    #[error("empty target set")]
    EmptyTargets,

    #[error("cardinality clash on `{variable}`: {left} vs {right}")]
    CardinalityClash {
        variable: String,
        left: usize,
        right: usize,
    },

    #[error("variable `{0}` is not in the factor scope")]
    NotInScope(String),

    #[error("evidence has zero probability under the model")]
    InconsistentEvidence,

    #[error("scope limit does not shield the targets: `{0}` is d-connected")]
    ScopeNotShielding(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("SLO file line {line}: {message}")]
    SloParse { line: usize, message: String },

    #[error("SLO `{slo}`: {message}")]
    InvalidSlo { slo: String, message: String },

    #[error("schedule line {line}: {message}")]
    ScheduleParse { line: usize, message: String },

    #[error("model file: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
