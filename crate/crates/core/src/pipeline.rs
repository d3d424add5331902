//! Full analysis run: preprocessing, features, synthesis, metrics, PCA,
//! figures, trajectories and the session folder.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audio::{load_wav, prepare, AudioBuffer, PreprocessConfig};
use crate::embedding::{joint_embedding, series_frames, PairedEmbedding, PcaModel};
use crate::metrics::{compute_all, QualityMetrics};
use crate::pitch::{track_pitch, PitchConfig, PitchTrack};
use crate::render::{render_comparison, render_embedding, ComparisonInputs, RasterImage};
use crate::session::{create_session, SessionArtifacts, SessionIdSource, SessionRecord};
use crate::spectral::{
    build_mel_filterbank, magnitude, mel_spectrogram, mfcc, rms_energy, spectral_bandwidth,
    spectral_centroid, stft, FeatureTimeSeries, MagnitudeSpectrogram, MelFilterbank,
    MelSpectrogram, StftConfig,
};
use crate::synthesis::{synthesize, MelInverse, SynthesisConfig};
use crate::trajectory::{build_trajectory, fill_unvoiced, Trajectory, TrajectoryInputs};
use crate::{Result, CANONICAL_SAMPLE_RATE};

pub const ORIGINAL_WAV: &str = "original.wav";
pub const SYNTHESIZED_WAV: &str = "synthesized.wav";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MelConfig {
    pub bands: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub mfcc_count: usize,
}

impl Default for MelConfig {
    fn default() -> Self {
        Self {
            bands: 128,
            f_min: 0.0,
            f_max: CANONICAL_SAMPLE_RATE as f64 / 2.0,
            mfcc_count: 13,
        }
    }
}

/// Every effective parameter of a run; serialized into metadata.json.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub sample_rate: u32,
    pub trim: bool,
    pub preprocess: PreprocessConfig,
    pub stft: StftConfig,
    pub mel: MelConfig,
    pub pitch: PitchConfig,
    pub synthesis: SynthesisConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            sample_rate: CANONICAL_SAMPLE_RATE,
            trim: true,
            preprocess: PreprocessConfig::default(),
            stft: StftConfig::default(),
            mel: MelConfig::default(),
            pitch: PitchConfig::default(),
            synthesis: SynthesisConfig::default(),
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        self.preprocess.validate()?;
        self.stft.validate()?;
        self.pitch.validate(self.sample_rate)?;
        self.synthesis.validate()?;
        Ok(())
    }

    pub fn filterbank(&self) -> Result<MelFilterbank> {
        build_mel_filterbank(
            self.mel.bands,
            self.stft.bins(),
            self.sample_rate,
            self.mel.f_min,
            self.mel.f_max,
        )
    }
}

/// Spectra and frame-level features of one stream.
#[derive(Debug, Clone)]
pub struct StreamAnalysis {
    pub audio: AudioBuffer,
    pub spectrum: MagnitudeSpectrogram,
    pub mel: MelSpectrogram,
    pub mfcc: FeatureTimeSeries,
    pub centroid: FeatureTimeSeries,
    pub bandwidth: FeatureTimeSeries,
    pub energy: FeatureTimeSeries,
    pub pitch: PitchTrack,
    pub pitch_filled: FeatureTimeSeries,
}

impl StreamAnalysis {
    pub fn trajectory(&self, hop: usize, audio_path: &str) -> Result<Trajectory> {
        build_trajectory(
            &TrajectoryInputs {
                centroid: &self.centroid,
                bandwidth: &self.bandwidth,
                pitch: &self.pitch,
                pitch_filled: &self.pitch_filled,
                energy: &self.energy,
            },
            self.audio.sample_rate,
            hop,
            audio_path,
        )
    }
}

pub fn analyze_stream(
    audio: &AudioBuffer,
    config: &AnalysisConfig,
    fb: &MelFilterbank,
) -> Result<StreamAnalysis> {
    let spectrum = magnitude(&stft(audio, &config.stft)?);
    let mel = mel_spectrogram(&spectrum, fb)?;
    let pitch_config = PitchConfig {
        stft: config.stft,
        ..config.pitch
    };
    let pitch = track_pitch(audio, &pitch_config)?;
    Ok(StreamAnalysis {
        audio: audio.clone(),
        mfcc: mfcc(&mel, config.mel.mfcc_count),
        centroid: spectral_centroid(&spectrum),
        bandwidth: spectral_bandwidth(&spectrum),
        energy: rms_energy(&spectrum),
        pitch_filled: fill_unvoiced(&pitch, config.pitch.f_min),
        pitch,
        spectrum,
        mel,
    })
}

/// In-memory outcome of a run, before anything touches the disk.
#[derive(Debug, Clone)]
pub struct AnalysisResult {
    pub config: AnalysisConfig,
    pub original: StreamAnalysis,
    pub synthesized: StreamAnalysis,
    pub metrics: QualityMetrics,
    pub pca: PcaModel,
    pub embedding: PairedEmbedding,
}

impl AnalysisResult {
    pub fn comparison_figure(&self) -> Result<RasterImage> {
        render_comparison(&ComparisonInputs {
            original: &self.original.audio,
            synthesized: &self.synthesized.audio,
            original_spectrum: &self.original.spectrum,
            synthesized_spectrum: &self.synthesized.spectrum,
            original_mel: &self.original.mel,
            synthesized_mel: &self.synthesized.mel,
            metrics: &self.metrics,
        })
    }

    pub fn embedding_figure(&self) -> Result<RasterImage> {
        render_embedding(&self.embedding)
    }
}

/// Runs every stage on an already prepared buffer.
pub fn analyze_audio(audio: &AudioBuffer, config: &AnalysisConfig) -> Result<AnalysisResult> {
    config.validate()?;
    let fb = config.filterbank()?;
    let synthesized = synthesize(audio, &config.stft, &fb, &config.synthesis)?;
    let metrics = compute_all(audio, &synthesized, &config.stft, &fb)?;
    let original = analyze_stream(audio, config, &fb)?;
    let synthesized = analyze_stream(&synthesized, config, &fb)?;
    let (pca, embedding) = joint_embedding(
        &series_frames(&original.mfcc),
        &series_frames(&synthesized.mfcc),
    )?;
    Ok(AnalysisResult {
        config: *config,
        original,
        synthesized,
        metrics,
        pca,
        embedding,
    })
}

/// Loads and prepares a WAV file with the configured preprocessing.
pub fn load_prepared(path: &Path, config: &AnalysisConfig) -> Result<AudioBuffer> {
    let wav = load_wav(path)?;
    prepare(&wav, config.sample_rate, &config.preprocess, config.trim)
}

/// Options of `soundplot analyze`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub trim: bool,
    pub remove_silence: bool,
    pub gl_iterations: usize,
    pub mel_inverse: MelInverse,
    pub f_min: f64,
    pub f_max: f64,
    pub seed: Option<u64>,
}

impl AnalyzeOptions {
    pub fn new(input: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        let defaults = AnalysisConfig::default();
        Self {
            input: input.into(),
            out_dir: out_dir.into(),
            trim: true,
            remove_silence: false,
            gl_iterations: defaults.synthesis.gl_iterations,
            mel_inverse: defaults.synthesis.mel_inverse,
            f_min: defaults.pitch.f_min,
            f_max: defaults.pitch.f_max,
            seed: None,
        }
    }

    pub fn config(&self) -> AnalysisConfig {
        let mut config = AnalysisConfig {
            trim: self.trim,
            ..AnalysisConfig::default()
        };
        config.preprocess.remove_silence = self.remove_silence;
        config.synthesis.gl_iterations = self.gl_iterations;
        config.synthesis.mel_inverse = self.mel_inverse;
        config.pitch.f_min = self.f_min;
        config.pitch.f_max = self.f_max;
        config
    }
}

/// A finished run: the session folder and its metadata.
#[derive(Debug, Clone)]
pub struct AnalyzeOutcome {
    pub folder: PathBuf,
    pub record: SessionRecord,
}

/// Analyze one file and write its session folder.
pub fn run_analyze(options: &AnalyzeOptions) -> Result<AnalyzeOutcome> {
    let config = options.config();
    config.validate()?;
    let audio = load_prepared(&options.input, &config)?;
    let result = analyze_audio(&audio, &config)?;
    let hop = config.stft.hop;
    let artifacts = SessionArtifacts {
        original: &result.original.audio,
        synthesized: &result.synthesized.audio,
        comparison: &result.comparison_figure()?,
        analysis: &result.embedding_figure()?,
        trajectory_original: &result.original.trajectory(hop, ORIGINAL_WAV)?,
        trajectory_synthesized: &result.synthesized.trajectory(hop, SYNTHESIZED_WAV)?,
        parameters: serde_json::to_value(config)?,
        metrics: result.metrics,
    };
    let mut ids = SessionIdSource::new(options.seed);
    let (folder, record) = create_session(&options.out_dir, &options.input, &mut ids, &artifacts)?;
    Ok(AnalyzeOutcome { folder, record })
}

/// Human-readable metrics block printed after a run.
pub fn write_summary<W: Write>(mut out: W, outcome: &AnalyzeOutcome) -> std::io::Result<()> {
    let m = &outcome.record.metrics;
    writeln!(out, "session: {}", outcome.folder.display())?;
    writeln!(out, "snr_db:        {:.2}", m.snr_db)?;
    writeln!(out, "waveform_corr: {:.4}", m.waveform_corr)?;
    writeln!(out, "spectral_corr: {:.4}", m.spectral_corr)?;
    writeln!(out, "mel_corr:      {:.4}", m.mel_corr)?;
    Ok(())
}
