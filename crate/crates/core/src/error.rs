use thiserror::Error;

/// Errors raised by the library. The CLI maps every variant to exit code 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("truth value {0} outside [0, 1]")]
    TruthOutOfRange(f64),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line}, column {column}: {source}")]
    Located {
        line: usize,
        column: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),

    #[error("predicate `{name}` has arity {expected}, used with {got} arguments")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("no feature vector for constant `{0}`")]
    MissingConstant(String),

    #[error("knowledge base is empty")]
    EmptyKnowledgeBase,

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("training aborted at epoch {epoch}: {message}")]
    TrainingAborted { epoch: usize, message: String },

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("model file error: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
