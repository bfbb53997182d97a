use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("simulation diverged at sample {sample}")]
    Diverged { sample: usize },

    #[error("singular posture (|det J| = {det:e})")]
    SingularPosture { det: f64 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("threshold calibration failed: {0}")]
    CalibrationFailed(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed run directory {path}: {reason}")]
    MalformedRun { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
