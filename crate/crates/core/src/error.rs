use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration field violates its invariant. `requirement` names the
    /// field and the bound it failed, e.g. `window_n ≥ 2`.
    #[error("invalid config: {requirement}")]
    InvalidConfig {
        field: &'static str,
        requirement: &'static str,
    },

    #[error("invalid bandwidth: {0}")]
    InvalidBandwidth(String),

    #[error("invalid synthetic parameters: {0}")]
    InvalidParams(String),

    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error("value {value} out of range for {what}")]
    OutOfRange { what: &'static str, value: u64 },

    #[error("pixel ({x}, {y}) outside {width}x{height} frame")]
    OutOfBounds { x: u32, y: u32, width: u32, height: u32 },

    #[error("{what}: expected {expected_width}x{expected_height}, found {width}x{height}")]
    DimensionMismatch {
        what: String,
        expected_width: u32,
        expected_height: u32,
        width: u32,
        height: u32,
    },

    #[error("{what}: expected {expected} values for a {width}x{height} image, found {len}")]
    PlaneLength {
        what: String,
        width: u32,
        height: u32,
        expected: usize,
        len: usize,
    },

    #[error("pixel model holds no samples")]
    EmptyModel,

    #[error("bandwidth estimation needs at least 2 frames, got {0}")]
    HistoryTooShort(usize),

    #[error("iou threshold {0} outside (0, 1]")]
    InvalidIouThreshold(f64),

    #[error("frame {index}: missing {modality} file {}", path.display())]
    MissingFrame {
        index: usize,
        modality: &'static str,
        path: PathBuf,
    },

    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 for validation failures, 2 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::MissingFrame { .. } | Error::Image { .. } | Error::Io { .. } => 2,
            _ => 1,
        }
    }
}
