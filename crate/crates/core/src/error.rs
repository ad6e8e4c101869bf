use thiserror::Error;

use crate::grid_map::{CellState, GridPos};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("position {pos} out of bounds for {rows}x{cols} map")]
    OutOfBounds { pos: GridPos, rows: usize, cols: usize },

    #[error("cell {pos} cannot be covered from state {state:?}")]
    InvalidTransition { pos: GridPos, state: CellState },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("invalid simulator state: {0}")]
    InvalidState(String),

    #[error("incompatible checkpoint: {0}")]
    IncompatibleCheckpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}
