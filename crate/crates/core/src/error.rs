use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("distance table is not symmetric at ({i}, {j})")]
    AsymmetricInput { i: usize, j: usize },
    #[error("distance ({i}, {j}) must be strictly positive")]
    NonPositiveOffDiagonal { i: usize, j: usize },
    #[error("diagonal entry ({i}, {i}) must be zero")]
    NonZeroDiagonal { i: usize },
    #[error("at least two points are required, got {0}")]
    TooFewPoints(usize),
    #[error("table must be {n}x{n}")]
    NotSquare { n: usize },
    #[error("point sets differ: {left} vs {right} points")]
    MismatchedGroundSet { left: usize, right: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("k = {k} is invalid for n = {n}")]
    InvalidK { n: usize, k: usize },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("scalar must be strictly positive")]
    NonPositiveScalar,
    #[error("distance function has tied weights")]
    TiedWeights,
    #[error("positions {p} and {q} are not adjacent")]
    NonAdjacentPositions { p: usize, q: usize },
    #[error("n must be even, got {0}")]
    OddN(usize),
    #[error("epsilon must lie strictly between 0 and 1")]
    EpsilonOutOfRange,
    #[error("precondition not met: {0}")]
    PreconditionNotMet(String),
    #[error("chain invariant violated at step {step}: {reason}")]
    ChainInvariantViolated { step: usize, reason: String },
    #[error("plugin launch failure: {0}")]
    PluginLaunchFailure(String),
    #[error("plugin timed out after {0} ms")]
    PluginTimeout(u64),
    #[error("plugin protocol error: {0}")]
    PluginProtocolError(String),
    #[error("plugin returned an invalid partition: {0}")]
    PluginInvalidPartition(String),
    #[error("unknown clustering function {0:?}")]
    UnknownFunction(String),
}

impl Error {
    pub fn is_plugin_failure(&self) -> bool {
        matches!(
            self,
            Error::PluginLaunchFailure(_)
                | Error::PluginTimeout(_)
                | Error::PluginProtocolError(_)
                | Error::PluginInvalidPartition(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
