use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("grid mismatch: {0} vs {1} cells per axis")]
    GridMismatch(usize, usize),
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("time step must be positive and finite, got {0}")]
    BadTimeStep(f64),
    #[error("Lipschitz safeguard tripped: |grad u|*dt = {product:.3e} >= {limit}")]
    SafeguardBreach { product: f64, limit: f64 },
    #[error("problem size {size} exceeds cap {cap}")]
    SizeCap { size: usize, cap: usize },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
