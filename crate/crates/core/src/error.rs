//! Error type shared across the crate.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid argument (wrong range, empty input, size mismatch).
    Param(String),
    /// Evaluation outside an analytic domain (diverging MGF, unsupported mode).
    Domain(String),
    /// Division by a vanishing quantity (e.g. conditioning on a full CDF).
    Singular(String),
    /// A fixed-point solver ran out of iterations; carries the last residual.
    Convergence { residual: f64, iterations: usize },
    /// Eigensolver or quadrature breakdown.
    Numeric(String),
    /// Malformed configuration text or command-line parameters.
    Config(String),
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Param(m) => write!(f, "parameter error: {m}"),
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Singular(m) => write!(f, "singularity: {m}"),
            Error::Convergence { residual, iterations } => {
                write!(f, "no convergence after {iterations} iterations (residual {residual:e})")
            }
            Error::Numeric(m) => write!(f, "numeric error: {m}"),
            Error::Config(m) => write!(f, "config error: {m}"),
            Error::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
