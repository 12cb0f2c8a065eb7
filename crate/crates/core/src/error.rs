use thiserror::Error;

use crate::Group;

/// Errors raised anywhere in the core crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid price grid: {0}")]
    InvalidGrid(&'static str),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(&'static str),

    #[error("invalid acceptance model: {0}")]
    InvalidModel(&'static str),

    #[error("group share q must lie strictly inside (0, 1), got {0}")]
    InvalidShare(f64),

    /// The conditional accepted price is undefined because the group never buys.
    #[error("group {} has zero acceptance mass under the policy", .0.label())]
    ZeroAcceptanceMass(Group),

    #[error("matrix is singular or near-singular (pivot {pivot:e} at column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("malformed linear program: {0}")]
    MalformedProgram(&'static str),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("problem exceeds capacity: {0}")]
    Capacity(&'static str),

    #[error("argument out of domain: {0}")]
    Domain(&'static str),

    #[error("closed form has a pole: {0}")]
    Pole(&'static str),

    #[error("policy is not procedurally fair (gap {0:e})")]
    NotProcedurallyFair(f64),

    /// No candidate policy satisfies the accumulated elimination constraints.
    #[error("no candidate policy satisfies the elimination ledger")]
    LedgerInfeasible,

    #[error("agent has exhausted its horizon")]
    Exhausted,

    #[error("protocol violation: {0}")]
    Protocol(&'static str),

    /// The highest price was never accepted during the warm-up phase.
    #[error("degenerate demand: estimated acceptance floor is zero")]
    DegenerateDemand,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
