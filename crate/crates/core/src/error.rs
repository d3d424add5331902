use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt WAV header: {0}")]
    CorruptHeader(String),
    #[error("audio contains no sample frames")]
    EmptyAudio,
    #[error("every frame is below the silence threshold")]
    AllSilent,
    #[error("audio is too short for analysis")]
    AudioTooShort,
    #[error("window/hop pair does not satisfy the overlap-add condition (win {win}, hop {hop})")]
    NonColaConfig { win: usize, hop: usize },
    #[error("invalid frequency range: {f_min} Hz .. {f_max} Hz")]
    InvalidRange { f_min: f64, f_max: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("signals have no overlapping samples")]
    EmptySignal,
    #[error("embedding contains no points")]
    EmptyEmbedding,
    #[error("session folder already exists: {}", .0.display())]
    Collision(PathBuf),
    #[error("PNG encoding failed: {0}")]
    Png(#[from] png::EncodingError),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status for the CLI: 2 for a missing input, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::FileNotFound(_) => 2,
            _ => 1,
        }
    }
}
