use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point generation failed: {0}")]
    GenerationFailure(String),

    #[error("singular evaluation: point ({x}, {y}) coincides with a charge")]
    SingularEvaluation { x: f64, y: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("unsupported certificate: {0}")]
    UnsupportedCertificate(String),

    #[error(
        "oversampling violation: {rows} rows for {cols} columns (ratio {ratio:.3}) is below the floor {floor}"
    )]
    OversamplingViolation {
        rows: usize,
        cols: usize,
        ratio: f64,
        floor: f64,
    },

    #[error("rank-zero system: every singular value is below the truncation threshold")]
    RankZero,

    #[error("linear program failed: {0}")]
    LpFailure(String),

    #[error("ill-conditioned Gram matrix: Cholesky failed at jitter {jitter:e}")]
    IllConditionedGram { jitter: f64 },

    #[error("degenerate trial space: {0}")]
    DegenerateTrialSpace(String),

    #[error("{step} failed: {source}")]
    Step {
        step: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfiguration(msg.into())
    }

    /// Wraps an error with the name of the pipeline step that produced it.
    pub fn in_step(self, step: &'static str) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }

    /// Innermost error, unwrapping step labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } => source.root(),
            other => other,
        }
    }
}
