use std::fmt;

/// A single failed bound in a probability assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Negative { vertex: usize },
    AboveOne { vertex: usize },
    EdgeSum { u: usize, v: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Negative { vertex } => write!(f, "p[{vertex}] < 0"),
            Violation::AboveOne { vertex } => write!(f, "p[{vertex}] > 1"),
            Violation::EdgeSum { u, v } => write!(f, "p[{u}] + p[{v}] > 1 on edge ({u},{v})"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit: {what} requires {requested}, cap is {cap}")]
    ResourceLimit {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("validation failed: {}", join(.0))]
    Validation(Vec<Violation>),

    #[error("solver failure: {reason} (iterations {iterations}, gap {gap:e}, primal residual {primal_residual:e}, dual residual {dual_residual:e})")]
    SolverFailure {
        reason: String,
        iterations: usize,
        gap: f64,
        primal_residual: f64,
        dual_residual: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("witness extraction failed: {0}")]
    Extraction(String),

    #[error("infeasible behavior: {0}")]
    InfeasibleBehavior(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("parse error: {0}")]
    Parse(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn resource_limit(what: &'static str, requested: u128, cap: usize) -> Error {
    Error::ResourceLimit {
        what,
        requested,
        cap: cap as u128,
    }
}
