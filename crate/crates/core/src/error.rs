use std::path::PathBuf;

use crate::volume::GridGeometry;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("label {value} at voxel {index} is outside {{0, 1, 2, 3}}")]
    LabelDomain { value: f64, index: usize },

    #[error("geometry mismatch: {left} vs {right}")]
    GeometryMismatch {
        left: GridGeometry,
        right: GridGeometry,
    },

    #[error("invalid volume: {0}")]
    InvalidVolume(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("incomplete metric table, missing {0}")]
    IncompleteTable(String),

    #[error("duplicate metric entry {0}")]
    DuplicateEntry(String),

    #[error("unknown team {0:?}")]
    UnknownTeam(String),

    #[error("phantom generation failed: {0}")]
    Generation(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input rather than by the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Generation(_))
    }
}
