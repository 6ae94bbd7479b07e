use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter or geometry value violates its contract. `key` names the
    /// offending quantity (axis, parameter or configuration key).
    #[error("invalid configuration for `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular stage matrix at Fourier mode {mode} (pivot magnitude {pivot:e})")]
    SingularMode { mode: usize, pivot: f64 },

    #[error("prediction diverged: non-finite stage values in sweep {sweep}")]
    Divergence { sweep: usize },

    #[error("non-finite values produced by the correction step")]
    NonFinite,

    #[error("Newton iteration did not converge in {iterations} iterations (residuals F1 = {f1:e}, F2 = {f2:e})")]
    NewtonNotConverged { iterations: usize, f1: f64, f2: f64 },

    #[error("degenerate supplementary directions: Newton Jacobian determinant {det:e} below threshold")]
    DegenerateDirections { det: f64 },

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("study configuration: {0}")]
    Study(String),

    #[error("undefined normalization: initial {0} is zero")]
    UndefinedNormalization(&'static str),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
