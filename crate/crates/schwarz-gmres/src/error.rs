//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("singular pivot in row {row}")]
    SingularMatrix { row: usize },

    #[error("singular local matrix in subdomain {subdomain}: {source}")]
    SingularSubdomain {
        subdomain: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("mesh level {level} out of range [{min}, {max}]")]
    LevelOutOfRange { level: usize, min: usize, max: usize },

    #[error("meshes are not nested: fine level {fine} must exceed coarse level {coarse}")]
    NotNested { fine: usize, coarse: usize },

    #[error("cannot split a {n}x{n} grid into {ns} subdomains: no p x q layout with sides dividing {n}")]
    IndivisibleGrid { n: usize, ns: usize },

    #[error("problem size {n} exceeds the dense-analysis limit {limit}")]
    SizeLimitExceeded { n: usize, limit: usize },

    #[error("matrix is not symmetric positive definite")]
    NotSpd,

    #[error("no symmetric operator attached; cannot apply the normal-form preconditioner")]
    MissingA0,

    #[error("residual history too short: need at least {need} entries, have {have}")]
    InsufficientHistory { need: usize, have: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed MatrixMarket input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
