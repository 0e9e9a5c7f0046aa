use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate state: zero norm")]
    DegenerateState,

    #[error("invalid density operator: {0}")]
    InvalidDensityOperator(String),

    #[error("beam splitter is not unitary: |T|^2 + |R|^2 = {0}")]
    NonUnitary(f64),

    #[error("protocol degenerate: leading coefficient is zero, no Gaussian limit")]
    ProtocolDegenerate,

    #[error("no Gaussian limit: vacuum coefficient is zero")]
    NoGaussianLimit,

    #[error("not normalizable: spectral norm of gamma is {0}")]
    NotNormalizable(f64),

    #[error("no click support: click probability {0:e}")]
    NoClickSupport(f64),

    #[error("iteration diverged at step {step}: squared norm {norm_sq:e} in the unit-vacuum convention")]
    Diverged { step: usize, norm_sq: f64 },

    #[error("truncation at step {step} discarded weight fraction {tail:e} (tolerance {tolerance:e})")]
    TruncationExceeded { step: usize, tail: f64, tolerance: f64 },

    #[error("cutoff mismatch: {0} vs {1}")]
    CutoffMismatch(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// Errors caused by the physics of the input rather than malformed input.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::ProtocolDegenerate
                | Error::NoGaussianLimit
                | Error::NotNormalizable(_)
                | Error::Diverged { .. }
                | Error::TruncationExceeded { .. }
                | Error::NoClickSupport(_)
                | Error::DegenerateState
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
