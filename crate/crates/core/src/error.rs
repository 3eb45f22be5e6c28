use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge on [{lo}, {hi}] (estimated error {estimate:e})")]
    NonConvergence { lo: f64, hi: f64, estimate: f64 },

    #[error("symmetric eigensolver did not converge for a {dim}x{dim} matrix")]
    ConvergenceFailure { dim: usize },

    #[error(
        "covariance matrix is numerically singular: smallest eigenvalue {min_eigenvalue:e} \
         <= threshold {threshold:e}"
    )]
    DegenerateCovariance { min_eigenvalue: f64, threshold: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("no real solution: {0}")]
    NoRealSolution(String),

    #[error("singular expression: {0}")]
    Singularity(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("replicate {index}: {source}")]
    Replicate {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
