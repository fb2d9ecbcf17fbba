use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Each variant names the violated precondition so the CLI can report it
/// verbatim.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An enumeration, grid or kernel would exceed its configured cap.
    #[error("size limit exceeded: {what} needs {requested}, cap is {cap}")]
    Size {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Shapes or boxes are inconsistent with the operation's contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Exact integer arithmetic overflowed its working width.
    #[error("arithmetic overflow: {0}")]
    Arithmetic(String),

    /// The oscillatory integral did not settle within the allowed node budget.
    #[error("quadrature did not reach tolerance {tol:e} (last correction {estimate:e}, {nodes} nodes per axis)")]
    Quadrature { tol: f64, estimate: f64, nodes: usize },

    /// Malformed external input (JSON, CSV, binary lattice files).
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn size(what: &'static str, requested: u128, cap: u128) -> Self {
        Error::Size {
            what,
            requested,
            cap,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
