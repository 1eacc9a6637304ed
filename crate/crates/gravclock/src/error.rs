use thiserror::Error;

/// Errors produced by state construction, conditioning, estimation, and
/// numerical routines. `NumericalFailure` and `FlatLikelihood` indicate that
/// a computation could not be completed reliably; everything else is a
/// rejected input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("state has {0} amplitudes; only one- and two-qubit states (2 or 4) are supported")]
    InvalidDimension(usize),

    #[error("state norm deviates from 1 by {0:.3e}")]
    NotNormalized(f64),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("conditioning outcome has probability {0:.3e}, below the representable threshold")]
    ImpossibleOutcome(f64),

    #[error("density matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("density matrix trace deviates from 1 by {0:.3e}")]
    BadTrace(f64),

    #[error("density matrix has negative eigenvalue {0:.3e}")]
    NotPositive(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("log-likelihood is flat over the search window; the data do not constrain the offset")]
    FlatLikelihood,
}

impl Error {
    /// True for failures of a numerical procedure (as opposed to rejected
    /// inputs). Used by callers that map errors onto process exit codes.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalFailure(_) | Error::FlatLikelihood | Error::ImpossibleOutcome(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
