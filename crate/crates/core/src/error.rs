use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid cardinality: {0}")]
    Cardinality(String),

    #[error("invalid variable: {0}")]
    Variable(String),

    #[error("state index {state} out of range for parent {parent} (cardinality {cardinality})")]
    StateOutOfRange {
        parent: usize,
        state: usize,
        cardinality: usize,
    },

    #[error("row index {index} out of range (table has {rows} rows)")]
    IndexOutOfRange { index: usize, rows: usize },

    #[error("row {row} is not a probability distribution: {reason}")]
    NotNormalized { row: String, reason: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("row {0} has zero total count")]
    ZeroCountRow(usize),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("invalid refinement spec: {0}")]
    Spec(String),

    #[error("invalid optimizer configuration: {0}")]
    Config(String),

    #[error("search space too large: {0}")]
    SearchSpace(String),

    #[error("invalid document: {0}")]
    Document(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ShapeMismatch(_) => 3,
            Error::SearchSpace(_) => 4,
            Error::Io(_) | Error::Csv(_) => 1,
            _ => 2,
        }
    }
}
