use thiserror::Error;

/// Errors produced by the generator-matrix laboratory.
#[derive(Debug, Error)]
pub enum SkgError {
    /// A matrix entry failed validation. Row and column are 1-based to match
    /// the vertex labels of the underlying graph.
    #[error("invalid matrix entry at ({row},{col}): {reason}")]
    InvalidEntry { row: usize, col: usize, reason: String },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A resource guard was exceeded (vertex count, group count, oracle size).
    #[error("guard exceeded: {what} = {value} > {limit}")]
    Guard { what: &'static str, value: u128, limit: u128 },

    /// Integer arithmetic would overflow 128 bits. Never wrapped.
    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("word length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    /// Eigensolver failed to reach the requested residual.
    #[error("eigensolver did not converge: residual {residual:.3e}")]
    NoConvergence { residual: f64 },

    #[error("rank {rank} out of range for group of size {size}")]
    RankOutOfRange { rank: u128, size: u128 },

    #[error("bad edge file: {0}")]
    BadEdgeFile(String),

    #[error("bad experiment config: {0}")]
    BadConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, SkgError>;
