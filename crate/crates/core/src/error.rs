use alloc::string::String;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("{what}: integration did not reach tolerance (value {value:e}, error estimate {achieved:e}, requested {requested:e})")]
    Integration {
        what: &'static str,
        value: f64,
        achieved: f64,
        requested: f64,
    },
    #[error("degenerate channel: {0}")]
    Degenerate(String),
    #[error("subset expansion over {ports} ports exceeds the cap of {cap}; use the Monte-Carlo path")]
    Complexity { ports: usize, cap: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(alloc::format!($($arg)*)) };
}
pub(crate) use domain;
