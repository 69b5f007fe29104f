use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, LvsdeError>;

#[derive(Debug, Error)]
pub enum LvsdeError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The z-th nearest neighbour of an instance coincides with it, so no
    /// neighbourhood normalizer can be derived.
    #[error("degenerate input: instance {instance} has a zero distance to its {z}-th nearest neighbour")]
    DegenerateInput { instance: usize, z: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("projection {point} has only {available} eligible neighbours, need k = {k}; use a smaller k")]
    InsufficientNeighbours {
        point: usize,
        available: usize,
        k: usize,
    },

    #[error("no instance has a projection in the evaluation layers")]
    EmptyEvaluationSet,

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl LvsdeError {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        LvsdeError::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
