use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A distribution or process parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A density or cdf was evaluated outside its support.
    #[error("argument outside domain: {0}")]
    Domain(String),
    /// A sampler was asked for a method that does not apply to its parameters.
    #[error("configuration error: {0}")]
    Config(String),
    /// Quadrature, root finding or a rejection loop failed to converge.
    #[error("numerical failure: {0}")]
    Numeric(String),
    /// The requested law exists but has no sampler in this regime.
    #[error("unsupported regime: {0}")]
    Regime(String),
}

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::$variant(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
