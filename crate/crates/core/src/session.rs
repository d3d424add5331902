//! Session folders: `{audio_name}_{session_id}/` with audio, figures,
//! trajectories and metadata.json.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::audio::{write_wav_16, AudioBuffer};
use crate::metrics::QualityMetrics;
use crate::render::RasterImage;
use crate::trajectory::Trajectory;
use crate::{Error, Result};

/// Id regenerations allowed after the first clash.
pub const MAX_ID_RETRIES: usize = 5;

/// File names of a complete session, in write order.
pub const SESSION_FILES: [&str; 7] = [
    "original.wav",
    "synthesized.wav",
    "comparison.png",
    "analysis.png",
    "trajectory_original.json",
    "trajectory_synthesized.json",
    "metadata.json",
];

/// File stem with anything outside `[A-Za-z0-9_-]` replaced by `_`.
pub fn sanitize_stem(path: &Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let clean: String = stem
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if clean.is_empty() {
        "audio".into()
    } else {
        clean
    }
}

/// Source of 8-digit lowercase hex session ids.
#[derive(Debug, Clone)]
pub struct SessionIdSource {
    rng: ChaCha8Rng,
}

impl SessionIdSource {
    /// Seeded sources are reproducible; `None` draws a seed from the OS.
    pub fn new(seed: Option<u64>) -> Self {
        let seed = seed.unwrap_or_else(rand::random);
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_id(&mut self) -> String {
        format!("{:08x}", self.rng.gen::<u32>())
    }
}

/// Relative paths of the session files as listed in metadata.json.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionFiles {
    pub original_audio: String,
    pub synthesized_audio: String,
    pub comparison: String,
    pub analysis: String,
    pub trajectory_original: String,
    pub trajectory_synthesized: String,
}

impl Default for SessionFiles {
    fn default() -> Self {
        let [a, b, c, d, e, f, _] = SESSION_FILES.map(String::from);
        Self {
            original_audio: a,
            synthesized_audio: b,
            comparison: c,
            analysis: d,
            trajectory_original: e,
            trajectory_synthesized: f,
        }
    }
}

impl SessionFiles {
    pub fn all(&self) -> [&str; 6] {
        [
            &self.original_audio,
            &self.synthesized_audio,
            &self.comparison,
            &self.analysis,
            &self.trajectory_original,
            &self.trajectory_synthesized,
        ]
    }
}

/// Contents of metadata.json.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session_id: String,
    pub audio_name: String,
    /// RFC 3339, UTC.
    pub created_at: String,
    pub parameters: serde_json::Value,
    pub metrics: QualityMetrics,
    pub files: SessionFiles,
}

impl SessionRecord {
    pub fn folder_name(&self) -> String {
        format!("{}_{}", self.audio_name, self.session_id)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(folder: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(folder.join("metadata.json"))?)
    }
}

/// Everything a session folder is written from.
pub struct SessionArtifacts<'a> {
    pub original: &'a AudioBuffer,
    pub synthesized: &'a AudioBuffer,
    pub comparison: &'a RasterImage,
    pub analysis: &'a RasterImage,
    pub trajectory_original: &'a Trajectory,
    pub trajectory_synthesized: &'a Trajectory,
    pub parameters: serde_json::Value,
    pub metrics: QualityMetrics,
}

/// Creates a fresh `{audio_name}_{id}` folder under `root`, drawing a new id
/// on every clash.
pub fn reserve_folder(
    root: &Path,
    audio_name: &str,
    ids: &mut SessionIdSource,
) -> Result<(PathBuf, String)> {
    fs::create_dir_all(root)?;
    let mut last = None;
    for _ in 0..=MAX_ID_RETRIES {
        let id = ids.next_id();
        let folder = root.join(format!("{audio_name}_{id}"));
        match fs::create_dir(&folder) {
            Ok(()) => return Ok((folder, id)),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => last = Some(folder),
            Err(e) => return Err(e.into()),
        }
    }
    Err(Error::Collision(last.expect("at least one attempt")))
}

/// Writes all seven session files and returns the folder with its record.
pub fn create_session(
    root: &Path,
    input: &Path,
    ids: &mut SessionIdSource,
    artifacts: &SessionArtifacts<'_>,
) -> Result<(PathBuf, SessionRecord)> {
    let audio_name = sanitize_stem(input);
    let (folder, session_id) = reserve_folder(root, &audio_name, ids)?;
    let files = SessionFiles::default();
    write_wav_16(&folder.join(&files.original_audio), artifacts.original)?;
    write_wav_16(
        &folder.join(&files.synthesized_audio),
        artifacts.synthesized,
    )?;
    artifacts
        .comparison
        .write_png(&folder.join(&files.comparison))?;
    artifacts
        .analysis
        .write_png(&folder.join(&files.analysis))?;
    artifacts
        .trajectory_original
        .write(&folder.join(&files.trajectory_original))?;
    artifacts
        .trajectory_synthesized
        .write(&folder.join(&files.trajectory_synthesized))?;
    let record = SessionRecord {
        session_id,
        audio_name,
        created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        parameters: artifacts.parameters.clone(),
        metrics: artifacts.metrics,
        files,
    };
    fs::write(folder.join("metadata.json"), record.to_json()?)?;
    Ok((folder, record))
}
