use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate distance interval: y_min = {y_min} must be below y_max = {y_max}")]
    DegenerateInterval { y_min: f64, y_max: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("infeasible design at threshold index {index}: lower limit {lower} exceeds upper limit {upper}")]
    Infeasible {
        index: usize,
        lower: f64,
        upper: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
