use std::path::PathBuf;

/// Crate-wide error type.
///
/// The variants map onto the CLI exit codes: validation and format errors
/// exit 2, I/O errors exit 3, backend/protocol errors exit 4.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument or data structure violates an invariant.
    #[error("validation: {0}")]
    Validation(String),

    /// A file or stream does not match its declared format.
    #[error("format: {0}")]
    Format(String),

    /// Underlying I/O failure, with the path when one is known.
    #[error("i/o{}: {source}", path.as_ref().map(|p| format!(" ({})", p.display())).unwrap_or_default())]
    Io {
        #[source]
        source: std::io::Error,
        path: Option<PathBuf>,
    },

    /// A generator backend failed. `frame_index` is the key-frame index in
    /// the source sequence that was being synthesized, when known.
    #[error("backend{}: {message}", frame_index.map(|i| format!(" (frame {i})")).unwrap_or_default())]
    Backend {
        message: String,
        frame_index: Option<usize>,
    },
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub fn io(source: std::io::Error, path: impl Into<PathBuf>) -> Self {
        Error::Io {
            source,
            path: Some(path.into()),
        }
    }

    pub fn backend(msg: impl Into<String>, frame_index: Option<usize>) -> Self {
        Error::Backend {
            message: msg.into(),
            frame_index,
        }
    }

    /// Attach a key-frame index to a backend error that lacks one.
    pub fn with_frame_index(self, index: usize) -> Self {
        match self {
            Error::Backend {
                message,
                frame_index: None,
            } => Error::Backend {
                message,
                frame_index: Some(index),
            },
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(source: std::io::Error) -> Self {
        Error::Io { source, path: None }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
