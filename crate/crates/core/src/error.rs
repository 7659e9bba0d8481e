use thiserror::Error;

/// Errors raised by the analytic and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("reaction coefficient beta must be positive (got {0})")]
    NonPositiveBeta(f64),

    #[error("boundary dissipation lambda must be positive (got {0})")]
    NonPositiveLambda(f64),

    #[error("bad geometry: {field} = {value}")]
    BadGeometry { field: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no sign change found for the characteristic function in [{lo}, {hi}]")]
    NoRootInBracket { lo: f64, hi: f64 },

    #[error("root scan exhausted at mu = {window}: found {found} of {wanted} roots")]
    RootCountShortfall {
        wanted: usize,
        found: usize,
        window: f64,
    },

    #[error("tridiagonal eigensolver did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("negative discriminant {0} (range formula used outside its hypotheses)")]
    NegativeDiscriminant(f64),

    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),

    #[error("no feasible theta: {0}")]
    EmptyFeasibleSet(String),

    #[error("state became non-finite at step {step} (t = {t})")]
    NonFiniteState { step: usize, t: f64 },

    #[error("initial state has zero H-norm")]
    ZeroInitialState,

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code: 2 for failed hypotheses, 3 for numerical failures,
    /// 1 for bad input or I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::HypothesisFailed(_) | Error::EmptyFeasibleSet(_) => 2,
            Error::NoRootInBracket { .. }
            | Error::RootCountShortfall { .. }
            | Error::ConvergenceFailure(_)
            | Error::NegativeDiscriminant(_)
            | Error::NonFiniteState { .. } => 3,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
