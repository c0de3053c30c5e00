use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("regime: {0}")]
    Regime(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("outer search failed: {0}")]
    Search(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("resolution: {0}")]
    Resolution(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by parameters outside the admissible regime or
    /// violated preconditions, as opposed to solver failures.
    pub fn is_regime_or_precondition(&self) -> bool {
        matches!(
            self,
            Error::Parameter(_)
                | Error::Precondition(_)
                | Error::Regime(_)
                | Error::Resolution(_)
                | Error::Geometry(_)
                | Error::InvalidInput(_)
        )
    }

    pub fn is_convergence(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::Search(_) | Error::Numeric(_))
    }
}
