use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid measurement ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("matrix is not symmetric (relative asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("matrix of order {0} exceeds the dense eigensolver limit of {1}")]
    TooLarge(usize, usize),

    #[error("index set is empty")]
    EmptyIndexSet,

    #[error("index {index} out of range for {len} measurements")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("no nonnegative dual weights; the nonnegative-support estimate is empty")]
    EmptySupport,

    #[error("sampling weights sum to zero")]
    ZeroWeights,

    #[error("observation vector is zero")]
    ZeroObservations,

    #[error("observation vector has no strictly positive entry")]
    NoPositiveObservation,

    #[error("cholesky factorization failed after diagonal shift")]
    CholeskyFailed,

    #[error("objective became non-finite at iteration {0}")]
    NonFiniteObjective(usize),

    #[error("descent diverged at iteration {iteration} (objective {objective:.3e}); retry with a smaller step size")]
    Diverged { iteration: usize, objective: f64 },

    #[error("initialization is degenerate: {0}")]
    DegenerateInit(String),

    #[error("ground truth is zero")]
    ZeroSignal,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::InvalidEnsemble(_) => "invalid_ensemble",
            Error::NotSymmetric(_) => "not_symmetric",
            Error::TooLarge(..) => "too_large",
            Error::EmptyIndexSet => "empty_index_set",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::EmptySupport => "empty_support",
            Error::ZeroWeights => "zero_weights",
            Error::ZeroObservations => "zero_observations",
            Error::NoPositiveObservation => "no_positive_observation",
            Error::CholeskyFailed => "cholesky_failed",
            Error::NonFiniteObjective(_) => "non_finite_objective",
            Error::Diverged { .. } => "diverged",
            Error::DegenerateInit(_) => "degenerate_init",
            Error::ZeroSignal => "zero_signal",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
        }
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        });
    }
    Ok(())
}
