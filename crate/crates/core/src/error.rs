use thiserror::Error;

/// Caveat attached to rank failures in the augmented regressions.
pub const MULTICOLLINEARITY_CAVEAT: &str = "the augmented regression is (near) collinear; this happens when an \
instrument is strongly correlated with the endogenous variable or is itself normally distributed, \
so its normal score is a rescaled copy of the raw column. A larger sample mitigates the problem";

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("empty input")]
    EmptyInput,

    #[error("column {column} is degenerate (fewer than two distinct values)")]
    DegenerateColumn { column: String },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("insufficient data: {observations} observations for {parameters} parameters")]
    InsufficientData { observations: usize, parameters: usize },

    #[error("design matrix is rank deficient at column {column}{}", hint.map(|h| format!(" ({h})")).unwrap_or_default())]
    RankDeficient { column: usize, hint: Option<&'static str> },

    #[error("restriction covariance is numerically singular (condition number {condition:.3e})")]
    SingularRestriction { condition: f64 },

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("matrix is not positive definite (failed at pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("latent correlation matrix of scenario is not positive definite (pivot {pivot}): {matrix:?}")]
    ScenarioNotPositiveDefinite { pivot: usize, matrix: Vec<Vec<f64>> },

    #[error("marginal has infinite variance")]
    InfiniteVariance,

    #[error("magnitude recovery is not defined for discrete column {0}")]
    NotApplicableDiscrete(String),

    #[error("endogenous variable and its normal score are nearly collinear (correlation {correlation:.6}); {MULTICOLLINEARITY_CAVEAT}")]
    NearCollinear { correlation: f64 },

    #[error("table layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("replication {rep} failed: {source}")]
    Replication {
        rep: usize,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse classification used by front ends to map failures onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Domain(_) | Error::InvalidParameter(_) | Error::LayoutMismatch(_) => {
                ErrorCategory::Usage
            }
            Error::EmptyInput
            | Error::DegenerateColumn { .. }
            | Error::InvalidDataset(_)
            | Error::InsufficientData { .. }
            | Error::NotApplicableDiscrete(_) => ErrorCategory::Data,
            Error::Numerical(_)
            | Error::RankDeficient { .. }
            | Error::SingularRestriction { .. }
            | Error::NotSymmetric
            | Error::NotPositiveDefinite { .. }
            | Error::ScenarioNotPositiveDefinite { .. }
            | Error::InfiniteVariance
            | Error::NearCollinear { .. } => ErrorCategory::Numerical,
            Error::Replication { source, .. } => source.category(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
