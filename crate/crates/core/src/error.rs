use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("vertex {0} listed twice among the special vertices")]
    DuplicateSpecial(usize),

    #[error("forbidden set #{set} lists vertex {vertex} more than once")]
    DuplicateInForbiddenSet { set: usize, vertex: usize },

    #[error("forbidden set #{set} has {len} element(s); forbidden sets need at least 2")]
    ForbiddenSetTooSmall { set: usize, len: usize },

    #[error("all {total} vertex pairs have already been emitted")]
    Exhausted { total: u64 },

    #[error("n = {n} is too large for {what} (limit {limit})")]
    TooLarge { what: &'static str, n: usize, limit: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("duplicate event name {0:?}")]
    DuplicateEvent(String),

    #[error("instance too large for exhaustive search: {0} labelings exceed the limit")]
    InstanceTooLarge(u128),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("order statistic index must be at least 1")]
    ZeroIndex,

    #[error("cannot aggregate an empty set of runs")]
    EmptyAggregate,

    /// Raised by output sinks handed to the harness.
    #[error("writing output: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, Error>;
