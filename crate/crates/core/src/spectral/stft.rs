use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::audio::AudioBuffer;
use crate::{Error, Result};

use super::{ComplexSpectrogram, FrameGrid, MagnitudeSpectrogram, StftConfig};

/// Periodic Hann window of length `n`.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Index into a signal of length `len` with even (edge-excluded) reflection,
/// repeating as often as needed.
fn reflect_index(i: i64, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as i64 - 1);
    let j = i.rem_euclid(period);
    if j < len as i64 {
        j as usize
    } else {
        (period - j) as usize
    }
}

/// Planned forward/inverse transforms for one [`StftConfig`].
pub struct StftProcessor {
    config: StftConfig,
    window: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl StftProcessor {
    pub fn new(config: StftConfig) -> Result<Self> {
        config.validate()?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            config,
            window: hann_window(config.win_size),
            forward: planner.plan_fft_forward(config.win_size),
            inverse: planner.plan_fft_inverse(config.win_size),
        })
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// The signal that frames are cut from: reflection padded when centered.
    pub fn padded(&self, samples: &[f64]) -> Vec<f64> {
        if !self.config.centered {
            return samples.to_vec();
        }
        let pad = (self.config.win_size / 2) as i64;
        let total = samples.len() as i64 + 2 * pad;
        (0..total)
            .map(|p| samples[reflect_index(p - pad, samples.len())])
            .collect()
    }

    /// Windowed DFT of `frames` frames read from `signal` at hop spacing.
    /// `signal` must hold at least `(frames - 1) * hop + win_size` samples.
    pub fn analyze(&self, signal: &[f64], frames: usize) -> FrameGrid<Complex64> {
        let w = self.config.win_size;
        let bins = self.config.bins();
        let mut grid = FrameGrid::filled(bins, frames, Complex64::new(0.0, 0.0));
        let mut buf = vec![Complex64::new(0.0, 0.0); w];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        for m in 0..frames {
            let start = m * self.config.hop;
            for (n, slot) in buf.iter_mut().enumerate() {
                *slot = Complex64::new(signal[start + n] * self.window[n], 0.0);
            }
            self.forward.process_with_scratch(&mut buf, &mut scratch);
            grid.frame_mut(m).copy_from_slice(&buf[..bins]);
        }
        grid
    }

    /// Weighted overlap-add of the windowed inverse DFTs, normalized by the
    /// summed squared window. Returns `(frames - 1) * hop + win_size` samples
    /// in padded-signal coordinates.
    pub fn overlap_add(&self, grid: &FrameGrid<Complex64>) -> Vec<f64> {
        let w = self.config.win_size;
        let hop = self.config.hop;
        let frames = grid.frames();
        if frames == 0 {
            return Vec::new();
        }
        let total = (frames - 1) * hop + w;
        let mut out = vec![0.0; total];
        let mut norm = vec![0.0; total];
        let mut buf = vec![Complex64::new(0.0, 0.0); w];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.inverse.get_inplace_scratch_len()];
        let half = w / 2;
        for (m, frame) in grid.iter_frames().enumerate() {
            // Hermitian extension of the one-sided spectrum.
            buf[0] = Complex64::new(frame[0].re, 0.0);
            buf[half] = Complex64::new(frame[half].re, 0.0);
            for k in 1..half {
                buf[k] = frame[k];
                buf[w - k] = frame[k].conj();
            }
            self.inverse.process_with_scratch(&mut buf, &mut scratch);
            let start = m * hop;
            for n in 0..w {
                out[start + n] += buf[n].re / w as f64 * self.window[n];
                norm[start + n] += self.window[n] * self.window[n];
            }
        }
        for (o, &z) in out.iter_mut().zip(&norm) {
            if z > 1e-10 {
                *o /= z;
            } else {
                *o = 0.0;
            }
        }
        out
    }

    pub fn stft(&self, samples: &[f64], sample_rate: u32) -> Result<ComplexSpectrogram> {
        if samples.is_empty() {
            return Err(Error::AudioTooShort);
        }
        let frames = self.config.frame_count(samples.len());
        if frames == 0 {
            return Err(Error::AudioTooShort);
        }
        let padded = self.padded(samples);
        Ok(ComplexSpectrogram {
            values: self.analyze(&padded, frames),
            sample_rate,
            config: self.config,
            signal_len: samples.len(),
        })
    }

    /// Inverse of [`StftProcessor::stft`]: overlap-add, then drop the padding
    /// and restore the recorded signal length.
    pub fn istft(&self, spec: &ComplexSpectrogram) -> Result<Vec<f64>> {
        if !self.config.satisfies_overlap_add() {
            return Err(Error::NonColaConfig {
                win: self.config.win_size,
                hop: self.config.hop,
            });
        }
        let full = self.overlap_add(&spec.values);
        let offset = if self.config.centered {
            self.config.win_size / 2
        } else {
            0
        };
        Ok((0..spec.signal_len)
            .map(|i| full.get(offset + i).copied().unwrap_or(0.0))
            .collect())
    }
}

/// Centered short-time Fourier transform with a periodic Hann window.
pub fn stft(audio: &AudioBuffer, config: &StftConfig) -> Result<ComplexSpectrogram> {
    StftProcessor::new(*config)?.stft(&audio.samples, audio.sample_rate)
}

pub fn istft(spec: &ComplexSpectrogram) -> Result<AudioBuffer> {
    let processor = StftProcessor::new(spec.config)?;
    Ok(AudioBuffer::new(
        processor.istft(spec)?,
        spec.sample_rate,
        "istft",
    ))
}

pub fn magnitude(spec: &ComplexSpectrogram) -> MagnitudeSpectrogram {
    MagnitudeSpectrogram {
        values: spec.values.map(|c| c.norm()),
        sample_rate: spec.sample_rate,
        config: spec.config,
        signal_len: spec.signal_len,
    }
}
