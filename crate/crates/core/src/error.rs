use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("size mismatch: expected {expected} values, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("field has no boundary tag; second y-derivative is undefined")]
    UnknownBoundaryTag,

    #[error("weight overflow at y = {y}: tail guard violated")]
    TailViolation { y: f64 },

    #[error("Gevrey radius {radius} overflows at |xi| = {xi_max}")]
    RadiusOverflow { radius: f64, xi_max: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unsupported scenario: {0}")]
    UnsupportedScenario(String),

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("initial data rejected: {0}")]
    InitialData(String),

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("analytic radius exhausted at t = {t} (theta = {theta})")]
    TStarReached { t: f64, theta: f64 },

    #[error("solution diverged at t = {t}")]
    Divergence { t: f64 },

    #[error("insufficient samples for fit: {found} found, {required} required")]
    InsufficientSamples { found: usize, required: usize },

    #[error("config error at key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("csv error: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
