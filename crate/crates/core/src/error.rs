use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node index {index} out of range for graph with {n_nodes} nodes")]
    IndexOutOfRange { index: usize, n_nodes: usize },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("graph is disconnected")]
    Disconnected,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("generation failed after {attempts} attempts: {reason}")]
    Generation { attempts: usize, reason: String },

    #[error("reshuffle stalled after {attempts} attempts ({done} of {requested} switches done)")]
    Reshuffle {
        attempts: usize,
        done: usize,
        requested: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("frequency resonance between nodes {a} and {b}: |gap| = {gap:e} below {min_gap:e}")]
    Resonance {
        a: usize,
        b: usize,
        gap: f64,
        min_gap: f64,
    },

    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },

    #[error("uncontrolled baseline R_as = {value:e} is below {epsilon:e}")]
    DegenerateBaseline { value: f64, epsilon: f64 },

    #[error("infeasible selection: {0}")]
    Selection(String),

    #[error("empty window: {0}")]
    EmptyWindow(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("schema version mismatch: found {found}, expected {expected}")]
    Schema { found: u32, expected: u32 },

    #[error("config: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
