use std::path::PathBuf;

use spin_atlas_core::Error;

/// Errors of the std layer.
#[derive(Debug, thiserror::Error)]
pub enum AtlasError {
    /// Physics or validation error from the engine.
    #[error(transparent)]
    Core(#[from] Error),
    /// File could not be read or written.
    #[error("{}: {source}", path.display())]
    Io {
        /// File involved.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },
    /// File content could not be parsed.
    #[error("{}: {message}", path.display())]
    Parse {
        /// File involved.
        path: PathBuf,
        /// What went wrong, with line numbers where known.
        message: String,
    },
    /// Invalid combination of options.
    #[error("{0}")]
    Usage(String),
}

impl AtlasError {
    /// Process exit code: 2 for usage errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            AtlasError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AtlasError::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        AtlasError::Parse { path: path.into(), message: message.into() }
    }
}
