//! Probabilistic YIN pitch tracking with HMM smoothing.

mod beta;
pub mod candidates;
pub mod viterbi;
pub mod yin;

use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::spectral::{FeatureTable, StftConfig, StftProcessor};
use crate::{Error, Result};

pub use beta::{beta_cdf, beta_quantile};
pub use candidates::{
    lag_range, pitch_candidates, Candidate, CandidateLattice, FrameCandidates, ThresholdPrior,
};
pub use viterbi::{bin_count, PitchHmm};
pub use yin::{cmndf, difference_function, DifferenceKernel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchConfig {
    pub f_min: f64,
    pub f_max: f64,
    pub threshold_count: usize,
    pub beta_a: f64,
    pub beta_b: f64,
    pub bins_per_semitone: usize,
    pub switch_prob: f64,
    pub max_semitones_per_frame: usize,
    pub no_trough_prob: f64,
    pub stft: StftConfig,
}

impl Default for PitchConfig {
    fn default() -> Self {
        Self {
            f_min: 65.0,
            f_max: 2093.0,
            threshold_count: 100,
            beta_a: 2.0,
            beta_b: 18.0,
            bins_per_semitone: 10,
            switch_prob: 0.01,
            max_semitones_per_frame: 10,
            no_trough_prob: 0.01,
            stft: StftConfig::default(),
        }
    }
}

impl PitchConfig {
    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        self.stft.validate()?;
        let nyquist = sample_rate as f64 / 2.0;
        if !(self.f_min > 0.0 && self.f_min < self.f_max && self.f_max <= nyquist) {
            return Err(Error::InvalidRange {
                f_min: self.f_min,
                f_max: self.f_max,
            });
        }
        if (sample_rate as f64 / self.f_min).ceil() as usize >= self.stft.win_size {
            return Err(Error::InvalidConfig(format!(
                "f_min {} Hz needs a lag longer than the {}-sample frame",
                self.f_min, self.stft.win_size
            )));
        }
        let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
        if self.threshold_count == 0
            || self.bins_per_semitone == 0
            || !(self.beta_a > 0.0 && self.beta_b > 0.0)
            || !prob_ok(self.switch_prob)
            || !prob_ok(self.no_trough_prob)
        {
            return Err(Error::InvalidConfig(
                "pitch tracker parameters out of range".into(),
            ));
        }
        Ok(())
    }
}

/// Decoded pitch per frame. Unvoiced frames carry `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchTrack {
    pub frame_times: Vec<f64>,
    pub f0: Vec<Option<f64>>,
    pub voiced_prob: Vec<f64>,
}

impl PitchTrack {
    pub fn len(&self) -> usize {
        self.f0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f0.is_empty()
    }

    pub fn voiced_fraction(&self) -> f64 {
        if self.f0.is_empty() {
            return 0.0;
        }
        self.f0.iter().filter(|f| f.is_some()).count() as f64 / self.f0.len() as f64
    }

    pub fn voiced_values(&self) -> Vec<f64> {
        self.f0.iter().flatten().copied().collect()
    }

    /// CSV columns `time_s,f0_hz,voiced_prob`; unvoiced frames leave `f0_hz`
    /// empty.
    pub fn to_table(&self) -> Result<FeatureTable> {
        let mut table = FeatureTable::new(self.frame_times.clone());
        let probs: Vec<Option<f64>> = self.voiced_prob.iter().map(|&p| Some(p)).collect();
        table
            .add_optional("f0_hz", &self.f0)?
            .add_optional("voiced_prob", &probs)?;
        Ok(table)
    }
}

/// Frames the audio on the STFT grid (no window) and builds the per-frame
/// candidate lattice.
pub fn candidate_lattice(audio: &AudioBuffer, config: &PitchConfig) -> Result<CandidateLattice> {
    config.validate(audio.sample_rate)?;
    if audio.is_empty() {
        return Err(Error::EmptyAudio);
    }
    let processor = StftProcessor::new(config.stft)?;
    let padded = processor.padded(&audio.samples);
    let frames = config.stft.frame_count(audio.len());
    let win = config.stft.win_size;

    let (_, hi) = lag_range(audio.sample_rate, config.f_min, config.f_max);
    let kernel = DifferenceKernel::new(win, (hi + 1).min(win - 1));
    let prior = ThresholdPrior::new(config.threshold_count, config.beta_a, config.beta_b);

    let mut out = Vec::with_capacity(frames);
    let mut buf = vec![0.0; win];
    for m in 0..frames {
        let start = m * config.stft.hop;
        // Non-centered framing can run past the end; zero-fill the tail.
        buf.fill(0.0);
        let end = (start + win).min(padded.len());
        if start < end {
            buf[..end - start].copy_from_slice(&padded[start..end]);
        }
        let dp = cmndf(&kernel.compute(&buf));
        out.push(pitch_candidates(&dp, audio.sample_rate, config, &prior));
    }
    Ok(CandidateLattice {
        frame_times: config.stft.frame_times(frames, audio.sample_rate),
        frames: out,
    })
}

/// Viterbi decoding of a lattice into a voiced/unvoiced pitch track.
pub fn viterbi_decode(lattice: &CandidateLattice, config: &PitchConfig) -> PitchTrack {
    let hmm = PitchHmm::new(lattice, config);
    let path = hmm.decode();
    let f0 = path
        .iter()
        .zip(&lattice.frames)
        .map(|(&state, frame)| {
            if !hmm.is_voiced(state) {
                return None;
            }
            let target = hmm.bin_frequency(state).ln();
            let freq = frame
                .candidates
                .iter()
                .map(|c| c.frequency)
                .min_by(|a, b| (a.ln() - target).abs().total_cmp(&(b.ln() - target).abs()))
                .unwrap_or_else(|| hmm.bin_frequency(state));
            Some(freq.clamp(config.f_min, config.f_max))
        })
        .collect();
    PitchTrack {
        frame_times: lattice.frame_times.clone(),
        f0,
        voiced_prob: lattice
            .frames
            .iter()
            .map(|f| f.voiced_mass().clamp(0.0, 1.0))
            .collect(),
    }
}

pub fn track_pitch(audio: &AudioBuffer, config: &PitchConfig) -> Result<PitchTrack> {
    let lattice = candidate_lattice(audio, config)?;
    Ok(viterbi_decode(&lattice, config))
}
