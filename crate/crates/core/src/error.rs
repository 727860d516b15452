use std::path::PathBuf;

/// Errors produced anywhere in the scoring pipeline and benchmark harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to decode image: {0}")]
    Decode(String),

    #[error("unsupported channel layout: {0}")]
    UnsupportedChannels(String),

    #[error("invalid raster: {0}")]
    InvalidRaster(String),

    #[error("geometry mismatch: reference is {reference}, distorted is {distorted}")]
    GeometryMismatch { reference: Shape, distorted: Shape },

    #[error("manifest parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("duplicate record id {id:?} at line {line}")]
    DuplicateId { id: String, line: u64 },

    #[error("image too small at level {level}: {rows}x{cols}, need at least {min}x{min}")]
    ImageTooSmall {
        level: usize,
        rows: usize,
        cols: usize,
        min: usize,
    },

    #[error("grid too small for split: {rows}x{cols}")]
    GridTooSmall { rows: usize, cols: usize },

    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("feature dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("feature set is empty")]
    EmptySet,

    #[error("coupling unavailable: {0}")]
    CouplingUnavailable(String),

    #[error("invalid distance {0}")]
    InvalidDistance(f64),

    #[error("feature file format error: {0}")]
    Format(String),

    #[error("bin count must be at least 2, got {0}")]
    BadBinCount(usize),

    #[error("histogram shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by inputs that could not be read or decoded,
    /// as opposed to inputs that were read but failed validation.
    pub fn is_input_failure(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Decode(_)
                | Error::UnsupportedChannels(_)
                | Error::Parse { .. }
                | Error::DuplicateId { .. }
                | Error::Format(_)
        )
    }
}

/// Width × height × channels of a raster, used in diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Shape {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.width, self.height, self.channels)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
