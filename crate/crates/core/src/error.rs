use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count {0} outside supported range [1, 16]")]
    QubitCountOutOfRange(usize),
    #[error("index {index} out of range for {len} qubits")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("qubit count mismatch: expected {expected}, got {got}")]
    QubitMismatch { expected: usize, got: usize },
    #[error("need at least {needed} qubits, got {got}")]
    TooFewQubits { needed: usize, got: usize },
    #[error("parameter index {index} out of range ({count} rotation parameters)")]
    ParamIndexOutOfRange { index: usize, count: usize },
    #[error("image {height}x{width} is smaller than kernel {kernel}")]
    ImageSmallerThanKernel {
        height: usize,
        width: usize,
        kernel: usize,
    },
    #[error("layer {layer}: intermediate map {height}x{width} is smaller than kernel {kernel}")]
    LayerShapeUnderflow {
        layer: usize,
        height: usize,
        width: usize,
        kernel: usize,
    },
    #[error("value {value} out of range [{lo}, {hi}]")]
    ValueOutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("invalid value: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("{path}: unsupported format: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },
    #[error("{path}: corrupt file: {reason}")]
    CorruptFile { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invariant violation at `{path}`: {message}")]
    InvariantViolation { path: String, message: String },
    #[error("invalid grid point: {0}")]
    InvalidGridPoint(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("test labels {0:?} do not occur in the training set")]
    NonOverlappingLabels(Vec<u32>),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn corrupt(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::CorruptFile {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn unsupported(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::UnsupportedFormat {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by the filesystem or file contents rather than by configuration.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io { .. } | Error::CorruptFile { .. } | Error::UnsupportedFormat { .. }
        )
    }
}
