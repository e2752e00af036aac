use thiserror::Error;

/// Errors produced by the analysis and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported dimension {n_r}x{n_t}: exact weight expansion is capped at {cap}")]
    UnsupportedDimension { n_r: usize, n_t: usize, cap: usize },

    #[error("empty interference mixture; use the noise-only path")]
    EmptyMixture,

    #[error("degenerate rates: groups {0} and {1} share a rate, regroup with a larger tolerance")]
    DegenerateRates(usize, usize),

    #[error("numeric instability: {0}")]
    NumericInstability(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
