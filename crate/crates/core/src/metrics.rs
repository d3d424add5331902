//! Reconstruction quality scores.

use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::spectral::{magnitude, mel_spectrogram, power_to_db, stft, MelFilterbank, StftConfig};
use crate::{Error, Result};

/// Bound on |SNR| in dB, used for the exact-match and zero-signal cases.
pub const SNR_CAP_DB: f64 = 120.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityMetrics {
    pub snr_db: f64,
    pub waveform_corr: f64,
    pub spectral_corr: f64,
    pub mel_corr: f64,
    #[serde(skip)]
    pub aligned_length: usize,
}

/// Truncates both signals to the shorter length.
pub fn align<'a>(x: &'a [f64], y: &'a [f64]) -> Result<(&'a [f64], &'a [f64])> {
    let n = x.len().min(y.len());
    if n == 0 {
        return Err(Error::EmptySignal);
    }
    Ok((&x[..n], &y[..n]))
}

/// `10 log10(sum x^2 / sum (x - y)^2)`, capped at +-120 dB.
pub fn snr_db(x: &[f64], y: &[f64]) -> Result<f64> {
    let (x, y) = align(x, y)?;
    let signal: f64 = x.iter().map(|v| v * v).sum();
    let noise: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    if signal == 0.0 {
        return Ok(-SNR_CAP_DB);
    }
    if noise == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (signal / noise).log10()).clamp(-SNR_CAP_DB, SNR_CAP_DB))
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&x| x == v[0])
}

/// Pearson correlation; 0 when either input is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let (a, b) = align(a, b)?;
    if is_constant(a) || is_constant(b) {
        return Ok(0.0);
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    let denom = (va * vb).sqrt();
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((cov / denom).clamp(-1.0, 1.0))
}

pub fn waveform_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    pearson(x, y)
}

fn aligned_buffers(x: &AudioBuffer, y: &AudioBuffer) -> Result<(AudioBuffer, AudioBuffer)> {
    let (a, b) = align(&x.samples, &y.samples)?;
    Ok((
        AudioBuffer::new(a.to_vec(), x.sample_rate, x.source_name.clone()),
        AudioBuffer::new(b.to_vec(), y.sample_rate, y.source_name.clone()),
    ))
}

/// Correlation of the flattened linear magnitude spectrograms.
pub fn spectral_correlation(x: &AudioBuffer, y: &AudioBuffer, config: &StftConfig) -> Result<f64> {
    let (x, y) = aligned_buffers(x, y)?;
    let sx = magnitude(&stft(&x, config)?);
    let sy = magnitude(&stft(&y, config)?);
    pearson(sx.values.as_slice(), sy.values.as_slice())
}

/// Correlation of the flattened dB mel spectrograms.
pub fn mel_correlation(
    x: &AudioBuffer,
    y: &AudioBuffer,
    config: &StftConfig,
    fb: &MelFilterbank,
) -> Result<f64> {
    let (x, y) = aligned_buffers(x, y)?;
    let mx = mel_spectrogram(&magnitude(&stft(&x, config)?), fb)?;
    let my = mel_spectrogram(&magnitude(&stft(&y, config)?), fb)?;
    pearson(
        &power_to_db(mx.values.as_slice()),
        &power_to_db(my.values.as_slice()),
    )
}

pub fn compute_all(
    x: &AudioBuffer,
    y: &AudioBuffer,
    config: &StftConfig,
    fb: &MelFilterbank,
) -> Result<QualityMetrics> {
    let (a, b) = align(&x.samples, &y.samples)?;
    Ok(QualityMetrics {
        snr_db: snr_db(a, b)?,
        waveform_corr: waveform_correlation(a, b)?,
        spectral_corr: spectral_correlation(x, y, config)?,
        mel_corr: mel_correlation(x, y, config, fb)?,
        aligned_length: a.len(),
    })
}
