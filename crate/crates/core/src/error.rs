use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("invalid chain: {0}")]
    InvalidChain(ValidationReport),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state subset is not closed: row {row} keeps {mass} of its probability mass")]
    NotClosed { row: usize, mass: f64 },

    #[error("matrix is singular (pivot {pivot:e} in column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("policy never terminates from some state (I - P is singular)")]
    NonTerminating,

    #[error("no convergence after {0} iterations")]
    IterationLimit(usize),

    #[error("state {state} absorbs itself without termination; elimination is undefined")]
    SingularElimination { state: usize },

    #[error("joint state space of {states} states exceeds the cap of {cap}")]
    StateSpaceCap { states: usize, cap: usize },

    #[error("optimal ratio {0} is not positive")]
    NonPositiveOptimum(f64),

    #[error("rollout exceeded {0} steps without terminating")]
    HorizonExceeded(u64),
}
