use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("empty tree not modeled")]
    EmptyTree,

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("not (3142,2-41-3)-avoiding: {0}")]
    NotInClass(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("{what} out of range: {value} (allowed {allowed})")]
    OutOfRange {
        what: &'static str,
        value: usize,
        allowed: String,
    },

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error("series precondition violated: {0}")]
    Series(String),

    #[error("degenerate seed: {0}")]
    DegenerateSeed(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }
}
