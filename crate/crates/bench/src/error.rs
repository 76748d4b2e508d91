use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("nominal closed loop under the reference gain is not stable (spectral radius {0})")]
    Unstable(f64),
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
