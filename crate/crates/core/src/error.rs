use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// Malformed input (dimension mismatch, empty grid, bad file contents, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A numerical routine failed to reach its tolerance.
    #[error("numerical failure in {op}: {detail}")]
    Numerical { op: &'static str, detail: String },

    /// The finite-difference grid is too coarse for the requested energy window.
    #[error(
        "grid spacing h = {h} is too coarse for lambda_max = {lambda_max}; use h <= {suggested_h}"
    )]
    Resolution {
        h: f64,
        lambda_max: f64,
        suggested_h: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        op,
        detail: detail.into(),
    }
}

pub(crate) fn numerical(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Numerical {
        op,
        detail: detail.into(),
    }
}
