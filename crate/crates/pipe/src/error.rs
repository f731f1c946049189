use std::path::PathBuf;

use serde_json::json;
use valence_core::dataset::JoinError;
use valence_core::synth::SynthError;

use crate::formats::FormatError;

#[derive(Debug, thiserror::Error)]
pub enum PipeError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Join(#[from] JoinError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{}: {message}", path.display())]
    Mismatch { path: PathBuf, message: String },
}

impl PipeError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> PipeError {
        let path = path.into();
        move |source| PipeError::Io { path, source }
    }

    pub fn format(path: impl Into<PathBuf>) -> impl FnOnce(FormatError) -> PipeError {
        let path = path.into();
        move |source| PipeError::Format { path, source }
    }

    pub fn stage(&self) -> &'static str {
        match self {
            PipeError::Config(_) => "config",
            PipeError::Io { .. } => "io",
            PipeError::Format { .. } | PipeError::Mismatch { .. } => "ingest",
            PipeError::Join(_) => "join",
            PipeError::Synth(_) => "synth",
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            PipeError::Config(_) => "invalid_config",
            PipeError::Io { .. } => "io_error",
            PipeError::Format { source, .. } => source.code(),
            PipeError::Join(JoinError::DuplicateSessionId(_)) => "duplicate_session_id",
            PipeError::Synth(_) => "invalid_synth_spec",
            PipeError::Mismatch { .. } => "inconsistent_inputs",
        }
    }

    /// 2 for configuration problems, 1 for everything found while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipeError::Config(_) => 2,
            _ => 1,
        }
    }

    /// The record printed on stderr when a command fails.
    pub fn record(&self, command: &str) -> serde_json::Value {
        json!({
            "error": {
                "command": command,
                "stage": self.stage(),
                "code": self.code(),
                "message": self.to_string(),
            }
        })
    }
}
