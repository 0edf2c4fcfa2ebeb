use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument left the mathematical domain of an operation.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// A geometric query could not be answered (point outside domain,
    /// projection outside the uniqueness tube, ...).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A grid or mesh fails a resolution requirement.
    #[error("grid error: {0}")]
    Grid(String),

    /// An iterative or direct solver failed to produce a valid solution.
    #[error("solver error: {0}")]
    Solver(String),

    /// A run configuration is malformed or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
