//! Error type for file IO, wire formats, and endpoint plumbing.

use std::path::Path;

use nestweak_core::CoreError;

use crate::llm::EndpointError;

#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {detail}")]
    Format {
        path: String,
        line: usize,
        detail: String,
    },
    #[error(transparent)]
    Endpoint(#[from] EndpointError),
    #[error("{0}")]
    Invalid(String),
}

impl ToolError {
    pub fn io(path: &Path, source: std::io::Error) -> ToolError {
        ToolError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn format(path: &Path, line: usize, detail: impl Into<String>) -> ToolError {
        ToolError::Format {
            path: path.display().to_string(),
            line,
            detail: detail.into(),
        }
    }
}
