//! Audio buffers, WAV I/O, resampling and Stage 2 preprocessing.

mod resample;
mod wav;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use resample::{resample, resample_channel, KAISER_BETA, TAPS_PER_SIDE};
pub use wav::{decode_wav, load_wav, write_wav_16, WavAudio};

/// Mono signal with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub source_name: String,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32, source_name: impl Into<String>) -> Self {
        Self {
            samples,
            sample_rate,
            source_name: source_name.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, &s| m.max(s.abs()))
    }

    fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self {
            samples,
            sample_rate: self.sample_rate,
            source_name: self.source_name.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub max_duration_s: f64,
    pub remove_silence: bool,
    /// dB below the loudest frame RMS at which a frame counts as silent.
    pub silence_floor_db: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            max_duration_s: 300.0,
            remove_silence: false,
            silence_floor_db: 60.0,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_duration_s > 0.0) {
            return Err(Error::InvalidConfig(
                "max_duration_s must be positive".into(),
            ));
        }
        if !(self.silence_floor_db > 0.0) {
            return Err(Error::InvalidConfig(
                "silence_floor_db must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Averages all channels sample by sample.
pub fn to_mono(audio: &WavAudio) -> AudioBuffer {
    let samples = match audio.channels.len() {
        1 => audio.channels[0].clone(),
        n => {
            let len = audio.frame_count();
            (0..len)
                .map(|i| audio.channels.iter().map(|c| c[i]).sum::<f64>() / n as f64)
                .collect()
        }
    };
    AudioBuffer::new(samples, audio.sample_rate, audio.source_name.clone())
}

/// Symmetric peak normalization: divides by `max |x|` so the peak lands on
/// exactly ±1 and zero stays zero. Silent input is returned unchanged.
pub fn normalize(buffer: &AudioBuffer) -> AudioBuffer {
    let peak = buffer.peak();
    if peak == 0.0 {
        return buffer.clone();
    }
    buffer.with_samples(buffer.samples.iter().map(|&s| s / peak).collect())
}

/// Keeps at most `max_duration_s` seconds from the start.
pub fn trim_duration(buffer: &AudioBuffer, max_duration_s: f64) -> AudioBuffer {
    let limit = (max_duration_s * buffer.sample_rate as f64).floor() as usize;
    if buffer.len() <= limit {
        return buffer.clone();
    }
    buffer.with_samples(buffer.samples[..limit].to_vec())
}

const SILENCE_FRAME: usize = 2048;
const SILENCE_HOP: usize = 512;

/// Strips leading and trailing silence.
///
/// Frames of 2048 samples (hop 512) are scored by RMS relative to the loudest
/// frame. The kept region spans the first to the last frame above
/// `-silence_floor_db`; inside those two boundary frames the edge is then
/// tightened to the first/last sample whose magnitude reaches the threshold
/// amplitude. Internal gaps are never removed.
pub fn remove_silence(buffer: &AudioBuffer, config: &PreprocessConfig) -> Result<AudioBuffer> {
    let (start, end) = silence_bounds(&buffer.samples, config.silence_floor_db)?;
    if start == 0 && end == buffer.len() {
        return Ok(buffer.clone());
    }
    Ok(buffer.with_samples(buffer.samples[start..end].to_vec()))
}

/// Returns the half-open range of samples kept by [`remove_silence`].
pub fn silence_bounds(samples: &[f64], silence_floor_db: f64) -> Result<(usize, usize)> {
    let n = samples.len();
    if n < SILENCE_FRAME {
        return Ok((0, n));
    }
    let frame_count = 1 + (n - SILENCE_FRAME) / SILENCE_HOP;
    let rms: Vec<f64> = (0..frame_count)
        .map(|m| {
            let frame = &samples[m * SILENCE_HOP..m * SILENCE_HOP + SILENCE_FRAME];
            (frame.iter().map(|s| s * s).sum::<f64>() / SILENCE_FRAME as f64).sqrt()
        })
        .collect();
    let peak = rms.iter().copied().fold(0.0_f64, f64::max);
    if peak == 0.0 {
        return Err(Error::AllSilent);
    }
    let threshold = peak * 10f64.powf(-silence_floor_db / 20.0);
    let first = rms
        .iter()
        .position(|&r| r >= threshold)
        .ok_or(Error::AllSilent)?;
    let last = rms
        .iter()
        .rposition(|&r| r >= threshold)
        .ok_or(Error::AllSilent)?;

    let mut start = first * SILENCE_HOP;
    let mut end = (last * SILENCE_HOP + SILENCE_FRAME).min(n);
    // The trailing frames past the last full frame are judged with the last frame.
    if last == frame_count - 1 {
        end = n;
    }
    // Edges only move where silent frames were actually dropped.
    if first > 0 {
        let first_frame_end = (first * SILENCE_HOP + SILENCE_FRAME).min(n);
        if let Some(i) = samples[start..first_frame_end]
            .iter()
            .position(|s| s.abs() >= threshold)
        {
            start += i;
        }
    }
    if last < frame_count - 1 {
        let last_frame_start = last * SILENCE_HOP;
        if let Some(i) = samples[last_frame_start..end]
            .iter()
            .rposition(|s| s.abs() >= threshold)
        {
            end = last_frame_start + i + 1;
        }
    }
    Ok((start, end))
}

/// Load, downmix, resample and preprocess in the fixed Stage 1/2 order.
pub fn prepare(
    audio: &WavAudio,
    target_rate: u32,
    config: &PreprocessConfig,
    trim: bool,
) -> Result<AudioBuffer> {
    config.validate()?;
    let mono = to_mono(audio);
    let resampled = resample(&mono, target_rate);
    let mut buffer = normalize(&resampled);
    if trim {
        buffer = trim_duration(&buffer, config.max_duration_s);
    }
    if config.remove_silence {
        match remove_silence(&buffer, config) {
            Ok(b) => buffer = b,
            Err(Error::AllSilent) => {}
            Err(e) => return Err(e),
        }
    }
    if buffer.is_empty() {
        return Err(Error::EmptyAudio);
    }
    Ok(buffer)
}
