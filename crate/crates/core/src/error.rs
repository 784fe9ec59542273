use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (deviation {deviation:.3e} exceeds tolerance)")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is singular (smallest singular value {min_singular_value:.3e})")]
    Singular { min_singular_value: f64 },

    #[error("Fourier index {index} aliases on a grid of {grid} samples (|n| must be at most {limit})")]
    SampledAliasing { index: i64, grid: usize, limit: i64 },

    #[error("invalid arc: {0}")]
    InvalidArc(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid grid size {0}: must be a power of two")]
    InvalidGrid(usize),

    #[error("Neumann series does not converge (contraction {contraction:.6})")]
    NoConvergence { contraction: f64 },

    #[error("iterative solver stalled after {iterations} iterations (relative residual {residual:.3e})")]
    SolverStalled { iterations: usize, residual: f64 },

    #[error("truncated Toeplitz system is singular")]
    SingularSystem,

    #[error("incompatible representation: {0}")]
    IncompatibleRepresentation(String),

    #[error("partition has degenerate measure {0}")]
    DegeneratePartition(f64),

    #[error("point {0} lies outside the domain")]
    OutOfDomain(String),

    #[error("angle {theta} is an arc endpoint of the partition")]
    EndpointSingularity { theta: f64 },

    #[error("closed forms disagree by {gap:.3e}")]
    ClosedFormMismatch { gap: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
