use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong between reading a configuration and writing
/// the last output file.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value failed validation. `path` names the offending
    /// field(s), e.g. `process.feed_per_tooth_mm`.
    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },

    /// A grid index fell outside the height field.
    #[error("grid index ({i}, {j}) outside {columns}x{rows} height field")]
    OutOfBounds {
        i: usize,
        j: usize,
        columns: usize,
        rows: usize,
    },

    /// Roughness was requested over stock the cutter never touched.
    #[error("roughness over unmachined stock is undefined (uncut cell at i={i}, j={j})")]
    Uncut { i: usize, j: usize },

    /// The optimized and reference kernels disagreed.
    #[error("kernel mismatch: {0}")]
    KernelMismatch(String),

    #[error("surface file: {0}")]
    Format(#[from] FormatError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input rather than by the environment.
    /// The CLI maps these to exit code 1 and everything else to 2.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Config { .. }
                | Error::OutOfBounds { .. }
                | Error::Uncut { .. }
                | Error::Format(_)
        )
    }
}

/// Structured failures while decoding an `SRTF` surface file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("bad magic bytes {0:?}, expected \"SRTF\"")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {found} (this build reads version {supported})")]
    Version { found: u32, supported: u32 },
    #[error("header truncated: {0} bytes, need 48")]
    TruncatedHeader(usize),
    #[error("payload truncated: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("invalid header: {0}")]
    Header(String),
    #[error("invalid height at index {index}: {reason}")]
    Height { index: usize, reason: String },
}
