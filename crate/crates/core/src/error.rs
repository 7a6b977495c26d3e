use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("png decode failed for {path}: {message}")]
    PngDecode { path: PathBuf, message: String },

    #[error("png encode failed for {path}: {message}")]
    PngEncode { path: PathBuf, message: String },

    #[error("{path}: expected {expected}, found {found}")]
    UnexpectedFormat {
        path: PathBuf,
        expected: &'static str,
        found: String,
    },

    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("depth {value} m at pixel ({x}, {y}) overflows 16-bit storage at scale {scale}")]
    DepthOverflow {
        x: usize,
        y: usize,
        value: f64,
        scale: f64,
    },

    #[error("no valid pixels: {0}")]
    NoValidPixels(&'static str),

    #[error("probability {value} out of [0, 1] at pixel ({x}, {y})")]
    ProbabilityOutOfRange { x: usize, y: usize, value: f64 },

    #[error("malformed {what}: {message}")]
    Malformed { what: &'static str, message: String },

    #[error("duplicate sample id `{0}`")]
    DuplicateId(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("trajectory error: {0}")]
    Trajectory(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
