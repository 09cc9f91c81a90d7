use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter, file field or argument failed validation.
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error("non-finite value in `{0}`")]
    NonFinite(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("unknown component `{0}`")]
    UnknownComponent(String),

    #[error("domain mismatch: {0}")]
    Domain(String),

    /// A directed cycle whose edges all have zero delay.
    #[error("cycle without delay through {0:?}")]
    AlgebraicLoop(Vec<String>),

    #[error("numerical divergence at step {step}: {what}")]
    Divergence { step: usize, what: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad inputs rather than I/O or numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid { .. }
                | Error::NonFinite(_)
                | Error::Dimension { .. }
                | Error::UnknownComponent(_)
                | Error::Domain(_)
                | Error::AlgebraicLoop(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub(crate) fn ensure_finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(field.to_string()))
    }
}
