use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unrecognized risk label {token:?}; accepted values are High-Risk, Medium-Risk, Low-Risk, Normal")]
    UnknownLabel { token: String },

    #[error("feature index {index} out of range (expected 0..{count})")]
    FeatureIndexOutOfRange { index: usize, count: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("{path}: {message}")]
    DataFile { path: String, message: String },

    #[error("stratification error: {0}")]
    Stratification(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("metrics error: {0}")]
    Metrics(String),

    #[error("{context}: {source}")]
    Annotated {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Wrap an error with the grid cell (or other context) it came from.
    pub fn annotate(self, context: impl Into<String>) -> Error {
        Error::Annotated {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
