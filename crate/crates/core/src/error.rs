use thiserror::Error;

/// Errors produced by instance validation, problem construction, and solving.
#[derive(Debug, Error)]
pub enum Error {
    /// The instance data violates a structural invariant.
    #[error("invalid instance: {0}")]
    Validation(String),

    /// A job id was referenced that the instance does not contain.
    #[error("unknown job id `{0}`")]
    UnknownJob(String),

    /// An operation was called with an out-of-range or inconsistent parameter.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The same (vacant, agent) pair was registered twice as a variable.
    #[error("duplicate variable for pair ({0}, {1})")]
    DuplicateVariable(String, String),

    /// A bit or spin vector does not match the problem size.
    #[error("vector length {got} does not match variable count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    /// The exhaustive solver was given more variables than it can enumerate.
    #[error("problem has {n} variables, exhaustive search is capped at {max}")]
    Capacity { n: usize, max: usize },

    /// A move list assigns one agent or one vacant job more than once.
    #[error("infeasible move set: {0}")]
    InfeasibleMoves(String),

    /// An internal consistency check failed; indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
