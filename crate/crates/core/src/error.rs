use thiserror::Error;

/// Errors raised across the forecasting stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("ill-conditioned system (condition estimate {condition:.3e}): {detail}")]
    Conditioning { condition: f64, detail: String },

    #[error("MAPE undefined: zero actual values at indices {indices:?}")]
    ZeroActual { indices: Vec<usize> },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Wraps an error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for failures caused by numerics rather than by the caller's input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Conditioning { .. } | Error::Degenerate(_) | Error::ZeroActual { .. } => true,
            Error::Stage { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
