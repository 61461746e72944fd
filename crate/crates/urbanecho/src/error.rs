use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    /// A numeric argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("manifest line {line}: {detail}")]
    ManifestRow { line: u64, detail: String },

    #[error("duplicate sample id {0}")]
    DuplicateSampleId(u64),

    #[error("raster dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Metric requested over an empty pixel selection.
    #[error("metric undefined: empty pixel mask")]
    EmptyMask,

    #[error("network error fetching {url} (bbox {bbox}): {detail}")]
    Network {
        url: String,
        bbox: String,
        detail: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
