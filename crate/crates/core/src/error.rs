use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnpError {
    #[error("invalid end space: {0}")]
    InvalidSpace(String),
    #[error("inconsistent maximality flags: {0}")]
    InconsistentFlags(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("smallness undecided by the rule set")]
    Undecided,
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),
    #[error("no selector index exists although the hypotheses hold")]
    NoSelector,
    #[error("level {level} exceeds track truncation {truncation}")]
    TruncationExceeded { level: usize, truncation: usize },
    #[error("curve is not simple")]
    NotSimple,
    #[error("curve is null-homotopic")]
    NullHomotopic,
    #[error("curve is not essential: {0}")]
    NotEssential(String),
    #[error("window levels differ ({0} vs {1})")]
    LevelMismatch(usize, usize),
    #[error("curve is not separating")]
    NotSeparating,
    #[error("image leaves the window; raise the level")]
    WindowOverflow,
    #[error("complexity cap exceeded: {0}")]
    CapExceeded(String),
    #[error("target unreachable within the cap")]
    Unreachable,
    #[error("projection is empty")]
    EmptyProjection,
    #[error("annular subsurface; use annular_twist")]
    AnnularSpec,
    #[error("witness set is empty")]
    EmptyWitness,
    #[error("constants infeasible: {0}")]
    ConstantInfeasible(String),
    #[error("fewer than three maximal types")]
    TooFewTypes,
    #[error("ball is disconnected")]
    DisconnectedBall,
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, CnpError>;
