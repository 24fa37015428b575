use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] edgecolor::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),

    #[error("plot: {0}")]
    Plot(String),
}

impl HarnessError {
    /// Process exit code: 2 for bad configuration or arguments, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use edgecolor::Error as E;
        match self {
            HarnessError::Config(_)
            | HarnessError::Core(E::Config(_) | E::Domain(_) | E::OverCap(_) | E::Parse { .. }) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
