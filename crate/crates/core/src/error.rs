use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular design: rank {rank} < {dim}")]
    SingularDesign { rank: usize, dim: usize },

    #[error("matrix not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("quadrature did not converge: estimated error {estimate:e} after {intervals} intervals")]
    Quadrature { estimate: f64, intervals: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-parsable category used as the CLI exit message prefix.
    pub fn category(&self) -> &'static str {
        match self {
            Error::ParameterDomain(_) => "parameter-domain",
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::SingularDesign { .. } => "singular-design",
            Error::NotPositiveDefinite(_) => "not-positive-definite",
            Error::Quadrature { .. } => "quadrature",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
