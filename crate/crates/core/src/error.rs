use thiserror::Error;

/// Errors raised by the exponent, oracle, code and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function it was passed to.
    #[error("domain error: {0}")]
    Domain(String),

    /// A fractional threshold does not land on the integer lattice of the
    /// requested block length.
    #[error("lattice error: {0}")]
    Lattice(String),

    /// A root or maximizer could not be bracketed or did not converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// No codebook satisfying the distance window was found.
    #[error("codebook construction failed: {0}")]
    Codebook(String),

    /// Malformed textual input (codebooks, bit strings).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
