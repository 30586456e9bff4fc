use arcsim_core::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type HarnessResult<T> = Result<T, HarnessError>;

impl HarnessError {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code: 2 for bad input, 3 for numerical failure, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Json(_) => 2,
            Self::Sim(e) => match e {
                SimError::EigenNonConvergence | SimError::NonFinite(_) => 3,
                SimError::InvalidParameter(_)
                | SimError::MalformedKet { .. }
                | SimError::LabelOutOfRange(_)
                | SimError::SiteOutOfRange { .. }
                | SimError::NoFockMode => 2,
                _ => 3,
            },
            Self::Io { .. } | Self::Csv(_) => 4,
        }
    }
}
