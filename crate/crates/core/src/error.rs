use thiserror::Error;

use crate::channel::ValidationReport;

/// Errors raised by channel construction, solvers and oracles.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid probability {value} for {what}; expected a value in [0, 1]")]
    InvalidProbability { what: &'static str, value: f64 },

    #[error("invalid run-length constraint: need 0 <= d < k, got d = {d}, k = {k}")]
    InvalidRll { d: usize, k: String },

    #[error("input {input} is forbidden at state {state}")]
    ForbiddenInput { state: usize, input: usize },

    #[error("row for state {state} is not a probability vector over its allowed inputs: {reason}")]
    InvalidRow { state: usize, reason: String },

    #[error("states unreachable from the initial state: {0:?}")]
    Unreachable(Vec<usize>),

    #[error("invalid channel:\n{0}")]
    InvalidChannel(ValidationReport),

    #[error("{0}")]
    Parse(String),

    #[error("enumeration needs {size} terms, above the limit of {limit}")]
    EnumerationGuard { size: f64, limit: f64 },

    #[error("constraint graph is reducible")]
    Reducible,

    #[error("channel is not connected: some state cannot reach every other state")]
    NotConnected,

    #[error("input distribution induces {0} closed communicating classes, expected exactly one")]
    NotSingleClass(usize),

    #[error("closed communicating class is periodic with period {0}")]
    Periodic(usize),

    #[error("no vertex v0 puts (s0, v0) in the closed communicating class")]
    NoInitialVertex,

    #[error("no aperiodic single-class input distribution exists on this V-graph")]
    NoFeasibleQ,

    #[error("invalid V-graph: {0}")]
    InvalidVGraph(String),

    #[error("dimension mismatch: expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("linear system is singular")]
    Singular,
}

pub type Result<T> = std::result::Result<T, Error>;
