//! Error type shared by every module of the crate.

use thiserror::Error;

/// Everything that can go wrong in a computation or an I/O round trip.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Two profiles that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    /// A removable singularity at r = 0 was hit without a supplied limit.
    #[error("missing limit at r = 0: {0}")]
    MissingLimit(String),
    /// A closed-form solution does not exist for the requested parameters.
    #[error("no solution: {0}")]
    NoSolution(String),
    /// An iterative solver failed; `trace` holds the residual history.
    #[error("did not converge after {iterations} iterations: {message}")]
    NonConvergence {
        iterations: usize,
        message: String,
        trace: Vec<f64>,
    },
    /// Time stepping produced values above the blow-up guard.
    #[error("blow-up at t = {time}: max |value| = {max_abs}")]
    BlowUp { time: f64, max_abs: f64 },
    /// A truncated sum was cut off while its last shell was still significant.
    #[error("truncation too small: last shell contributes {contribution:e} (K = {order})")]
    Truncation { order: i64, contribution: f64 },
    /// Linear-algebra structure (Jordan block, rank, spectrum) is not as required.
    #[error("structure error: {0}")]
    Structure(String),
    /// A coefficient that must be non-zero vanished.
    #[error("degenerate: {0}")]
    Degenerate(String),
    /// An identity name is not in the catalogue.
    #[error("unknown identity: {0}")]
    UnknownIdentity(String),
    /// Internal contract violation by the caller (e.g. stride mismatch).
    #[error("logic error: {0}")]
    Logic(String),
    /// A fitted quantity was rejected because its input data were inconsistent.
    #[error("fit rejected: {0}")]
    FitRejected(String),
    /// Malformed file contents.
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
