use crate::audio::AudioBuffer;
use crate::Result;

use super::stft::StftProcessor;
use super::{FeatureTimeSeries, FrameGrid, MagnitudeSpectrogram, StftConfig, DB_FLOOR};

/// Lower edge of the first octave band of spectral contrast.
pub const CONTRAST_FMIN_HZ: f64 = 200.0;
/// Fraction of a band's bins averaged for the peak and valley estimates.
pub const CONTRAST_QUANTILE: f64 = 0.02;

fn per_frame(
    mag: &MagnitudeSpectrogram,
    name: &str,
    f: impl Fn(&[f64], &[f64]) -> f64,
) -> FeatureTimeSeries {
    let freqs = mag.bin_frequencies();
    let values = mag
        .values
        .iter_frames()
        .map(|frame| f(frame, &freqs))
        .collect();
    FeatureTimeSeries::scalar(name, mag.frame_times(), values)
}

fn centroid_of(frame: &[f64], freqs: &[f64]) -> f64 {
    let total: f64 = frame.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    frame.iter().zip(freqs).map(|(s, f)| s * f).sum::<f64>() / total
}

/// Magnitude-weighted mean frequency per frame; 0 Hz for silent frames.
pub fn spectral_centroid(mag: &MagnitudeSpectrogram) -> FeatureTimeSeries {
    per_frame(mag, "spectral_centroid", centroid_of)
}

/// Magnitude-weighted standard deviation of frequency around the centroid.
pub fn spectral_bandwidth(mag: &MagnitudeSpectrogram) -> FeatureTimeSeries {
    per_frame(mag, "spectral_bandwidth", |frame, freqs| {
        let total: f64 = frame.iter().sum();
        if total <= 0.0 {
            return 0.0;
        }
        let mu = centroid_of(frame, freqs);
        let var = frame
            .iter()
            .zip(freqs)
            .map(|(s, f)| (f - mu) * (f - mu) * s)
            .sum::<f64>()
            / total;
        var.max(0.0).sqrt()
    })
}

/// Frequency of the first bin at which the cumulative magnitude reaches
/// `fraction` of the frame total.
pub fn spectral_rolloff(mag: &MagnitudeSpectrogram, fraction: f64) -> FeatureTimeSeries {
    per_frame(mag, "spectral_rolloff", |frame, freqs| {
        let total: f64 = frame.iter().sum();
        if total <= 0.0 {
            return 0.0;
        }
        let target = fraction * total;
        let mut acc = 0.0;
        for (s, f) in frame.iter().zip(freqs) {
            acc += s;
            if acc >= target {
                return *f;
            }
        }
        *freqs.last().unwrap_or(&0.0)
    })
}

/// Bin ranges of the contrast sub-bands: `[0, 200)`, then octaves from 200 Hz,
/// the last band extended to Nyquist.
fn contrast_bands(freqs: &[f64], band_count: usize) -> Vec<(usize, usize)> {
    let mut edges = vec![0.0];
    edges.extend((0..band_count).map(|i| CONTRAST_FMIN_HZ * 2f64.powi(i as i32)));
    let k = freqs.len();
    (0..=band_count)
        .map(|b| {
            let lo_hz = edges[b];
            let lo = freqs.iter().position(|&f| f >= lo_hz).unwrap_or(k);
            let hi = if b == band_count {
                k
            } else {
                freqs.iter().position(|&f| f >= edges[b + 1]).unwrap_or(k)
            };
            (lo, hi.max(lo))
        })
        .collect()
}

fn to_db(v: f64) -> f64 {
    10.0 * v.max(DB_FLOOR).log10()
}

/// Peak-minus-valley level per octave sub-band, in dB. Returns
/// `band_count + 1` rows.
pub fn spectral_contrast(mag: &MagnitudeSpectrogram, band_count: usize) -> FeatureTimeSeries {
    let freqs = mag.bin_frequencies();
    let bands = contrast_bands(&freqs, band_count);
    let rows = band_count + 1;
    let mut data = Vec::with_capacity(rows * mag.frames());
    let mut sorted = Vec::new();
    for frame in mag.values.iter_frames() {
        for &(lo, hi) in &bands {
            if hi <= lo {
                data.push(0.0);
                continue;
            }
            sorted.clear();
            sorted.extend_from_slice(&frame[lo..hi]);
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len();
            let q = ((CONTRAST_QUANTILE * n as f64).round() as usize).clamp(1, n);
            let valley = sorted[..q].iter().sum::<f64>() / q as f64;
            let peak = sorted[n - q..].iter().sum::<f64>() / q as f64;
            data.push(to_db(peak) - to_db(valley));
        }
    }
    FeatureTimeSeries {
        name: "spectral_contrast".into(),
        frame_times: mag.frame_times(),
        values: FrameGrid::from_vec(rows, mag.frames(), data).expect("rows * frames values"),
    }
}

/// Fraction of adjacent sample pairs per frame whose signs differ, zero
/// counting as nonnegative. Frames follow the STFT framing.
pub fn zero_crossing_rate(audio: &AudioBuffer, config: &StftConfig) -> Result<FeatureTimeSeries> {
    let processor = StftProcessor::new(*config)?;
    if audio.is_empty() {
        return Err(crate::Error::AudioTooShort);
    }
    let frames = config.frame_count(audio.len());
    let padded = processor.padded(&audio.samples);
    let w = config.win_size;
    let values = (0..frames)
        .map(|m| {
            let frame = &padded[m * config.hop..m * config.hop + w];
            let crossings = frame
                .windows(2)
                .filter(|p| (p[0] >= 0.0) != (p[1] >= 0.0))
                .count();
            crossings as f64 / w as f64
        })
        .collect();
    Ok(FeatureTimeSeries::scalar(
        "zero_crossing_rate",
        config.frame_times(frames, audio.sample_rate),
        values,
    ))
}

/// Root-mean-square of the magnitude bins of each frame.
pub fn rms_energy(mag: &MagnitudeSpectrogram) -> FeatureTimeSeries {
    per_frame(mag, "rms_energy", |frame, _| {
        (frame.iter().map(|s| s * s).sum::<f64>() / frame.len() as f64).sqrt()
    })
}
