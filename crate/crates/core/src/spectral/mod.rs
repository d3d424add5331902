//! Short-time Fourier analysis, mel filterbanks, MFCCs and frame-level
//! spectral descriptors.

mod descriptors;
mod export;
mod mel;
mod stft;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use descriptors::{
    rms_energy, spectral_bandwidth, spectral_centroid, spectral_contrast, spectral_rolloff,
    zero_crossing_rate, CONTRAST_FMIN_HZ, CONTRAST_QUANTILE,
};
pub use export::{format_sig9, FeatureTable};
pub use mel::{
    build_mel_filterbank, hz_to_mel, mel_spectrogram, mel_to_hz, mfcc, power_to_db, MelFilterbank,
    DB_FLOOR, TOP_DB,
};
pub use stft::{hann_window, istft, magnitude, stft, StftProcessor};

/// Frame-major storage: `height` values per frame, `frames` frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGrid<T> {
    data: Vec<T>,
    height: usize,
    frames: usize,
}

impl<T: Clone> FrameGrid<T> {
    pub fn filled(height: usize, frames: usize, value: T) -> Self {
        Self {
            data: vec![value; height * frames],
            height,
            frames,
        }
    }
}

impl<T> FrameGrid<T> {
    pub fn from_vec(height: usize, frames: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != height * frames {
            return Err(Error::ShapeMismatch {
                expected: height * frames,
                actual: data.len(),
            });
        }
        Ok(Self {
            data,
            height,
            frames,
        })
    }

    pub fn from_frames(height: usize, frames: Vec<Vec<T>>) -> Result<Self> {
        let count = frames.len();
        let mut data = Vec::with_capacity(height * count);
        for f in frames {
            if f.len() != height {
                return Err(Error::ShapeMismatch {
                    expected: height,
                    actual: f.len(),
                });
            }
            data.extend(f);
        }
        Ok(Self {
            data,
            height,
            frames: count,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn frame(&self, m: usize) -> &[T] {
        &self.data[m * self.height..(m + 1) * self.height]
    }

    pub fn frame_mut(&mut self, m: usize) -> &mut [T] {
        &mut self.data[m * self.height..(m + 1) * self.height]
    }

    pub fn iter_frames(&self) -> impl Iterator<Item = &[T]> {
        // chunks_exact panics on a zero chunk size.
        self.data.chunks_exact(self.height.max(1)).take(self.frames)
    }

    pub fn get(&self, row: usize, m: usize) -> &T {
        &self.data[m * self.height + row]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Values of one row across all frames.
    pub fn row(&self, row: usize) -> impl Iterator<Item = &T> + '_ {
        (0..self.frames).map(move |m| self.get(row, m))
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> FrameGrid<U> {
        FrameGrid {
            data: self.data.iter().map(f).collect(),
            height: self.height,
            frames: self.frames,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftConfig {
    pub win_size: usize,
    pub hop: usize,
    /// Reflection-pad `win_size / 2` samples on both sides before framing.
    pub centered: bool,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            win_size: 2048,
            hop: 512,
            centered: true,
        }
    }
}

impl StftConfig {
    pub fn new(win_size: usize, hop: usize, centered: bool) -> Result<Self> {
        let config = Self {
            win_size,
            hop,
            centered,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.win_size < 2 || !self.win_size.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "window size {} is not a power of two",
                self.win_size
            )));
        }
        if self.hop == 0 || self.hop > self.win_size {
            return Err(Error::InvalidConfig(format!(
                "hop {} must be in 1..={}",
                self.hop, self.win_size
            )));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.win_size / 2 + 1
    }

    /// Number of frames produced for a signal of `len` samples.
    pub fn frame_count(&self, len: usize) -> usize {
        if self.centered {
            1 + len / self.hop
        } else if len >= self.win_size {
            1 + (len - self.win_size) / self.hop
        } else {
            0
        }
    }

    pub fn frame_times(&self, frames: usize, sample_rate: u32) -> Vec<f64> {
        (0..frames)
            .map(|m| (m * self.hop) as f64 / sample_rate as f64)
            .collect()
    }

    /// Checks that overlap-added squared Hann windows never vanish, which the
    /// weighted overlap-add inverse divides by.
    pub fn satisfies_overlap_add(&self) -> bool {
        if self.validate().is_err() {
            return false;
        }
        let window = hann_window(self.win_size);
        (0..self.hop).all(|offset| {
            let sum: f64 = (offset..self.win_size)
                .step_by(self.hop)
                .map(|n| window[n] * window[n])
                .sum();
            sum > 1e-10
        })
    }
}

/// Frequency in Hz of bin `k`.
pub fn bin_frequency(k: usize, sample_rate: u32, win_size: usize) -> f64 {
    k as f64 * sample_rate as f64 / win_size as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    /// `bins` values per frame.
    pub values: FrameGrid<Complex64>,
    pub sample_rate: u32,
    pub config: StftConfig,
    /// Length of the analyzed signal; the inverse transform restores it.
    pub signal_len: usize,
}

impl ComplexSpectrogram {
    pub fn bins(&self) -> usize {
        self.values.height()
    }

    pub fn frames(&self) -> usize {
        self.values.frames()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeSpectrogram {
    pub values: FrameGrid<f64>,
    pub sample_rate: u32,
    pub config: StftConfig,
    pub signal_len: usize,
}

impl MagnitudeSpectrogram {
    pub fn bins(&self) -> usize {
        self.values.height()
    }

    pub fn frames(&self) -> usize {
        self.values.frames()
    }

    pub fn frame_times(&self) -> Vec<f64> {
        self.config.frame_times(self.frames(), self.sample_rate)
    }

    pub fn bin_frequencies(&self) -> Vec<f64> {
        (0..self.bins())
            .map(|k| bin_frequency(k, self.sample_rate, self.config.win_size))
            .collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.map(|v| v * c),
            ..self.clone()
        }
    }
}

/// Mel power spectrogram, `bands` values per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    pub values: FrameGrid<f64>,
    pub sample_rate: u32,
    pub config: StftConfig,
    pub signal_len: usize,
}

impl MelSpectrogram {
    pub fn bands(&self) -> usize {
        self.values.height()
    }

    pub fn frames(&self) -> usize {
        self.values.frames()
    }
}

/// Per-frame feature values: `dims` rows (1 for scalar features).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTimeSeries {
    pub name: String,
    pub frame_times: Vec<f64>,
    pub values: FrameGrid<f64>,
}

impl FeatureTimeSeries {
    pub fn scalar(name: impl Into<String>, frame_times: Vec<f64>, values: Vec<f64>) -> Self {
        let frames = values.len();
        Self {
            name: name.into(),
            frame_times,
            values: FrameGrid {
                data: values,
                height: 1,
                frames,
            },
        }
    }

    pub fn dims(&self) -> usize {
        self.values.height()
    }

    pub fn frames(&self) -> usize {
        self.values.frames()
    }

    /// Row 0 as a flat slice (the whole series for scalar features).
    pub fn scalar_values(&self) -> Vec<f64> {
        self.values.row(0).copied().collect()
    }
}
