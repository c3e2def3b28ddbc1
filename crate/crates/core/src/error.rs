use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole of the gamma function at {0}")]
    Pole(f64),

    #[error("alpha = 1 is only available with the alpha-one flag enabled")]
    AlphaOneDisabled,

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("degenerate spread: {0}")]
    DegenerateSpread(String),

    #[error("insufficient samples: need at least {need}, got {got}")]
    InsufficientSamples { need: usize, got: usize },

    #[error("deployment contains no base stations")]
    EmptyDeployment,

    #[error("point ({0}, {1}) lies outside the deployment bounds")]
    OutsideBounds(f64, f64),

    #[error("deployment too large: expected {expected:.3e} points exceeds the limit of {limit}")]
    TooManyPoints { expected: f64, limit: usize },

    #[error("malformed deployment file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Integration(_) | Error::Optimization(_) | Error::TooManyPoints { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
