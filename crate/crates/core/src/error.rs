use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by dataset synthesis, matching, and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    Dimensions(String),

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("invalid mask value {value} at index {index}")]
    MaskValue { index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("directory not found or unreadable: {}", .0.display())]
    MissingDirectory(PathBuf),

    #[error("cannot decode image {}: {reason}", .path.display())]
    Decode { path: PathBuf, reason: String },

    #[error("too few images in {}: found {found}, need at least {needed}", .path.display())]
    TooFewImages {
        path: PathBuf,
        found: usize,
        needed: usize,
    },

    #[error("unknown texture id {0}")]
    UnknownTexture(usize),

    #[error("glyph {}: {reason}", .path.display())]
    BadGlyph { path: PathBuf, reason: String },

    #[error("at least one region required")]
    NoRegions,

    #[error("reference texture {0} is not assigned to any region")]
    ReferenceAbsent(usize),

    #[error("retry budget of {attempts} attempts exhausted: {what}")]
    RetriesExhausted { attempts: usize, what: &'static str },

    #[error("insufficient {what}: split has {available}, need {needed}")]
    Insufficient {
        what: &'static str,
        available: usize,
        needed: usize,
    },

    #[error("degenerate reference: {0}")]
    DegenerateReference(&'static str),

    #[error("channel mismatch: field has {field}, reference has {reference}")]
    ChannelMismatch { field: usize, reference: usize },

    #[error("missing counterpart for sample {id}: {}", .path.display())]
    MissingSample { id: String, path: PathBuf },

    #[error("manifest {}: {reason}", .path.display())]
    Manifest { path: PathBuf, reason: String },

    #[error("I/O error at {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot encode {}: {reason}", .path.display())]
    Encode { path: PathBuf, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
