use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid gate {gate}: {message}")]
    Validation { gate: usize, message: String },
    #[error("gate {gate} has {arity} operands; only 1- and 2-qubit gates are supported")]
    UnsupportedGate { gate: usize, arity: usize },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("no valid mapping found up to horizon {0}")]
    HorizonExhausted(usize),
    #[error("solver timed out")]
    Timeout,
    #[error("solver binary not found: {0}")]
    SolverMissing(String),
    #[error("solver protocol error: {message}\n--- solver output ---\n{output}")]
    Protocol { message: String, output: String },
    #[error("mapping failed verification: {0}")]
    Verification(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
