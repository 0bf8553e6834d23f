use thiserror::Error;

/// Errors raised by constructions, metric computations and analyses.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A size cap was hit; the caller must raise it explicitly.
    #[error("{what} {requested} exceeds the cap {cap}; raise it with {flag}")]
    Resource {
        what: &'static str,
        requested: usize,
        cap: usize,
        flag: &'static str,
    },

    /// A graph or matrix violates a structural invariant.
    #[error("structural error: {0}")]
    Structural(String),

    /// The hypothesis of an extractor or selector does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}

pub fn check_cap(
    what: &'static str,
    requested: usize,
    cap: usize,
    flag: &'static str,
) -> Result<()> {
    if requested > cap {
        Err(Error::Resource {
            what,
            requested,
            cap,
            flag,
        })
    } else {
        Ok(())
    }
}
