//! Birdsong analysis and resynthesis.
//!
//! The pipeline loads a WAV recording, extracts frame-level acoustic features
//! (spectral centroid, bandwidth, rolloff, contrast, zero-crossing rate, MFCCs
//! and a pYIN pitch track), reconstructs the audio from its 128-band mel
//! spectrogram with Griffin-Lim, scores the reconstruction, compares both
//! streams in a joint PCA space and writes a session folder with audio,
//! figures, 3D trajectories and metadata.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audio;
pub mod embedding;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod pitch;
pub mod render;
pub mod session;
pub mod spectral;
pub mod synthesis;
pub mod trajectory;

pub use error::{Error, Result};

/// Canonical processing rate in Hz.
pub const CANONICAL_SAMPLE_RATE: u32 = 22_050;
