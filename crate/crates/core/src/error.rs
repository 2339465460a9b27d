use thiserror::Error;

/// Diagnostics attached to a refused linear solve.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SolveDiagnostics {
    pub order: usize,
    pub condition_number: f64,
    pub residual: Option<f64>,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("incomplete input: {0}")]
    IncompleteInput(String),

    #[error("insufficient angular coverage: bins {deficient:?} hold fewer than {min_count} samples")]
    InsufficientAngularCoverage {
        deficient: Vec<usize>,
        min_count: usize,
    },

    #[error(
        "ill-conditioned moment system at order {}: {} (condition number {:.3e})",
        .0.order, .0.reason, .0.condition_number
    )]
    IllConditioned(SolveDiagnostics),

    #[error("degenerate statistic: {0}")]
    DegenerateStatistic(String),

    #[error("oracle precision: {0}")]
    OraclePrecision(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable short name of the error class, used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::InsufficientData(_) => "insufficient-data",
            Error::IncompleteInput(_) => "incomplete-input",
            Error::InsufficientAngularCoverage { .. } => "insufficient-angular-coverage",
            Error::IllConditioned(_) => "ill-conditioned",
            Error::DegenerateStatistic(_) => "degenerate-statistic",
            Error::OraclePrecision(_) => "oracle-precision",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }
}
