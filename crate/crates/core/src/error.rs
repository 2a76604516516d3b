use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("quad {quad} is non-CCW/non-convex: a^({corner}) = {value:e}")]
    NonConvex { quad: usize, corner: usize, value: f64 },

    #[error("quad {quad} is degenerate (minimum angle is zero)")]
    Degenerate { quad: usize },

    #[error("hanging vertex {vertex} lies inside edge ({lo}, {hi})")]
    HangingVertex { vertex: usize, lo: usize, hi: usize },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular matrix: zero pivot at step {pivot} of {size}")]
    Singular { pivot: usize, size: usize },

    #[error("stiffness matrix is not positive definite on the free dofs: {0}")]
    Indefinite(String),

    #[error("insufficient boundary data: {0}")]
    InsufficientData(String),

    #[error("relative norm undefined: exact solution has zero {0} norm")]
    ZeroNorm(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
