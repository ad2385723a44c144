use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("target out of range: {target} (model tracks {targets} targets)")]
    TargetOutOfRange { target: i64, targets: usize },

    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),

    #[error("invalid scoring table: {0}")]
    InvalidTable(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite reward {0}")]
    NonFiniteReward(f64),

    #[error("task time must be finite and non-negative, got {0}")]
    InvalidTime(f64),

    #[error("a strategy query is already pending for this session")]
    QueryPending,

    #[error("task performance received without a pending strategy query")]
    NoPendingQuery,

    #[error("task `{got}` does not match pending query for task `{expected}`")]
    TaskMismatch { expected: String, got: String },

    #[error("timed out awaiting task performance; episode {episode} recorded without learning")]
    TimedOut { episode: usize },

    #[error("cannot parse `{0}`")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
