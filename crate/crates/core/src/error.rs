use thiserror::Error;

/// Error type shared across the library.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("index error: {0}")]
    Index(String),
    #[error("environment does not cover the requested window: {0}")]
    Coverage(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("no admissible path: {0}")]
    NoPath(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
