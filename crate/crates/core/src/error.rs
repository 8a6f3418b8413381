use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data: {rows} rows for {dim} unknowns")]
    InsufficientData { rows: usize, dim: usize },

    /// The instrumented cross-moment matrix is numerically singular. For the
    /// contract instrument this means exploration did not span all tasks.
    #[error("ill-conditioned cross-moment matrix (sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e})")]
    IllConditioned { sigma_min: f64, sigma_max: f64 },

    #[error("repeated-signal estimator requires a second signal matrix")]
    MissingSecondSignal,

    #[error("contract component {index} = {value} lies outside [{lo}, {hi}]")]
    OutsideBox { index: usize, value: f64, lo: f64, hi: f64 },

    #[error("affine contract has negative intercept {0}; refinement to a linear contract is not supported")]
    NegativeIntercept(f64),

    #[error("no self-owned hyperplane found: {0}")]
    SelfOwnedNotFound(String),

    #[error("grid resolution {0} is finer than the supported minimum 0.05")]
    ResolutionTooFine(f64),

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("schema error at row {row}: {msg}")]
    Schema { row: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
