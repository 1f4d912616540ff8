use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    Mesh(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("covariance matrix is not positive definite (pivot {pivot} at row {row})")]
    NotSpd { row: usize, pivot: f64 },
    #[error("inadmissible state at cell ({i}, {j}): rho={rho}, p={p}")]
    State { i: usize, j: usize, rho: f64, p: f64 },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
    /// Help or version text requested on the command line.
    #[error("{0}")]
    Help(String),
}

pub type Result<T> = std::result::Result<T, Error>;
