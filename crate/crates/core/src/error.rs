use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unbound name `{0}`")]
    Unbound(String),
    #[error("arity mismatch for `{name}`: expected {expected}, found {found}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("overlapping clauses in `{fun}`: {detail}")]
    Overlap { fun: String, detail: String },
    #[error("non-exhaustive patterns in `{fun}`: missing {missing}")]
    NonExhaustive { fun: String, missing: String },
    #[error("invalid program: {0}")]
    Invalid(String),
    #[error("not in distilled form: {0}")]
    NotDistilled(String),
    #[error("`{fun}` is not encodable: {reason}")]
    NotEncodable { fun: String, reason: String },
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("fuel exhausted after {0} steps")]
    FuelExhausted(u64),
    #[error("skeleton task for element {index} failed: {source}")]
    Task {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn runtime(msg: impl Into<String>) -> Error {
        Error::Runtime(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Error {
        Error::Invalid(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
