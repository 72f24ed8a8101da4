use std::path::PathBuf;

/// Errors from the experiment runner.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] fasotfs_core::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },
    #[error("experiment {experiment} appears with two config digests ({first} and {second}); rerun so all inputs share one config")]
    DigestMismatch { experiment: String, first: String, second: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
