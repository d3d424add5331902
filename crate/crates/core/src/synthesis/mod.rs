//! Mel inversion and Griffin-Lim phase reconstruction.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::audio::{normalize, AudioBuffer};
use crate::spectral::{
    magnitude, mel_spectrogram, stft, ComplexSpectrogram, FrameGrid, MagnitudeSpectrogram,
    MelFilterbank, MelSpectrogram, StftConfig, StftProcessor,
};
use crate::{Error, Result};

/// How the linear magnitude is estimated from mel power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MelInverse {
    /// Moore-Penrose pseudo-inverse, negatives clamped to zero.
    #[default]
    PseudoInverse,
    /// Non-negative least squares by multiplicative updates.
    NonNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub gl_iterations: usize,
    pub pinv_rcond: f64,
    pub phase_epsilon: f64,
    pub mel_inverse: MelInverse,
    /// Update count for [`MelInverse::NonNegative`].
    pub nnls_iterations: usize,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            gl_iterations: 32,
            pinv_rcond: 1e-8,
            phase_epsilon: 1e-12,
            mel_inverse: MelInverse::PseudoInverse,
            nnls_iterations: 200,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gl_iterations == 0 {
            return Err(Error::InvalidConfig(
                "gl_iterations must be at least 1".into(),
            ));
        }
        if !(self.pinv_rcond >= 0.0 && self.phase_epsilon > 0.0) {
            return Err(Error::InvalidConfig(
                "rcond and phase epsilon must be positive".into(),
            ));
        }
        if self.mel_inverse == MelInverse::NonNegative && self.nnls_iterations == 0 {
            return Err(Error::InvalidConfig(
                "nnls_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Moore-Penrose pseudo-inverse of a filterbank, `bins` rows by `bands`
/// columns, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoInverse {
    pub values: Vec<f64>,
    pub bins: usize,
    pub bands: usize,
}

impl PseudoInverse {
    pub fn get(&self, bin: usize, band: usize) -> f64 {
        self.values[bin * self.bands + band]
    }
}

/// SVD pseudo-inverse, dropping singular values below `rcond * sigma_max`.
pub fn mel_pseudo_inverse(fb: &MelFilterbank, rcond: f64) -> PseudoInverse {
    let m = DMatrix::from_row_slice(fb.bands, fb.bins, &fb.weights);
    let svd = m.svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = rcond * sigma_max;

    // M+ = V diag(1/s) U^T, summed over retained singular values.
    let mut values = vec![0.0; fb.bins * fb.bands];
    for (r, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            continue;
        }
        let inv = 1.0 / s;
        for k in 0..fb.bins {
            let vk = v_t[(r, k)] * inv;
            if vk == 0.0 {
                continue;
            }
            let row = &mut values[k * fb.bands..(k + 1) * fb.bands];
            for (b, out) in row.iter_mut().enumerate() {
                *out += vk * u[(b, r)];
            }
        }
    }
    PseudoInverse {
        values,
        bins: fb.bins,
        bands: fb.bands,
    }
}

/// `S[k, m] = sqrt(max(0, sum_b M+[k, b] * S_mel[b, m]))`.
pub fn mel_to_linear(mel: &MelSpectrogram, pinv: &PseudoInverse) -> Result<MagnitudeSpectrogram> {
    if mel.bands() != pinv.bands {
        return Err(Error::ShapeMismatch {
            expected: pinv.bands,
            actual: mel.bands(),
        });
    }
    let mut values = FrameGrid::filled(pinv.bins, mel.frames(), 0.0);
    for m in 0..mel.frames() {
        let column = mel.values.frame(m);
        for (k, out) in values.frame_mut(m).iter_mut().enumerate() {
            let row = &pinv.values[k * pinv.bands..(k + 1) * pinv.bands];
            let power: f64 = row.iter().zip(column).map(|(a, b)| a * b).sum();
            *out = if power > 0.0 { power.sqrt() } else { 0.0 };
        }
    }
    Ok(MagnitudeSpectrogram {
        values,
        sample_rate: mel.sample_rate,
        config: mel.config,
        signal_len: mel.signal_len,
    })
}

/// Non-negative least-squares magnitude: minimizes `‖M s − S_mel‖` over
/// `s ≥ 0` per frame with Lee-Seung multiplicative updates started from
/// `Mᵀ S_mel`, then takes `sqrt(s)`.
pub fn mel_to_linear_nonneg(
    mel: &MelSpectrogram,
    fb: &MelFilterbank,
    iterations: usize,
) -> Result<MagnitudeSpectrogram> {
    if mel.bands() != fb.bands {
        return Err(Error::ShapeMismatch {
            expected: fb.bands,
            actual: mel.bands(),
        });
    }
    let supports: Vec<(usize, usize)> = (0..fb.bands).map(|b| fb.support(b)).collect();
    let transpose_apply = |y: &[f64], out: &mut [f64]| {
        out.fill(0.0);
        for (b, &(lo, hi)) in supports.iter().enumerate() {
            for (k, o) in out.iter_mut().enumerate().take(hi).skip(lo) {
                *o += fb.weight(b, k) * y[b];
            }
        }
    };
    let apply = |s: &[f64], out: &mut [f64]| {
        for (b, &(lo, hi)) in supports.iter().enumerate() {
            out[b] = (lo..hi).map(|k| fb.weight(b, k) * s[k]).sum();
        }
    };
    let mut values = FrameGrid::filled(fb.bins, mel.frames(), 0.0);
    let (mut mty, mut ms, mut mtms) = (vec![0.0; fb.bins], vec![0.0; fb.bands], vec![0.0; fb.bins]);
    for m in 0..mel.frames() {
        let y = mel.values.frame(m);
        transpose_apply(y, &mut mty);
        let s = values.frame_mut(m);
        s.copy_from_slice(&mty);
        for _ in 0..iterations {
            apply(s, &mut ms);
            transpose_apply(&ms, &mut mtms);
            for ((v, &num), &den) in s.iter_mut().zip(&mty).zip(&mtms) {
                *v = if den > 0.0 { *v * num / den } else { 0.0 };
            }
        }
        for v in s.iter_mut() {
            *v = v.max(0.0).sqrt();
        }
    }
    Ok(MagnitudeSpectrogram {
        values,
        sample_rate: mel.sample_rate,
        config: mel.config,
        signal_len: mel.signal_len,
    })
}

/// Linear magnitude estimate selected by `config.mel_inverse`.
pub fn estimate_linear(
    mel: &MelSpectrogram,
    fb: &MelFilterbank,
    config: &SynthesisConfig,
) -> Result<MagnitudeSpectrogram> {
    match config.mel_inverse {
        MelInverse::PseudoInverse => mel_to_linear(mel, &mel_pseudo_inverse(fb, config.pinv_rcond)),
        MelInverse::NonNegative => mel_to_linear_nonneg(mel, fb, config.nnls_iterations),
    }
}

/// Raw Griffin-Lim output before peak normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct GriffinLimRun {
    /// Reconstructed signal, `signal_len` samples.
    pub samples: Vec<f64>,
    /// Spectral convergence of the signal available after each iteration.
    pub convergence: Vec<f64>,
}

fn frobenius(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `||S_a - S_b||_F / ||S_b||_F`; 0 when both are zero.
pub fn spectral_convergence(estimate: &[f64], target: &[f64]) -> f64 {
    let denom = frobenius(target);
    let num = estimate
        .iter()
        .zip(target)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if denom > 0.0 {
        num / denom
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Griffin-Lim starting from an explicit complex spectrogram estimate.
///
/// Each iteration inverts the current estimate, re-analyzes the signal and
/// re-imposes the target magnitude. `convergence[i]` is the spectral
/// convergence of the signal the function would return after `i + 1`
/// iterations.
pub fn griffin_lim_from(
    target: &MagnitudeSpectrogram,
    initial: FrameGrid<Complex64>,
    iterations: usize,
    phase_epsilon: f64,
) -> Result<GriffinLimRun> {
    let processor = StftProcessor::new(target.config)?;
    if initial.height() != target.bins() || initial.frames() != target.frames() {
        return Err(Error::ShapeMismatch {
            expected: target.values.as_slice().len(),
            actual: initial.as_slice().len(),
        });
    }
    let mut estimate = ComplexSpectrogram {
        values: initial,
        sample_rate: target.sample_rate,
        config: target.config,
        signal_len: target.signal_len,
    };
    let mut convergence = Vec::with_capacity(iterations);
    let mut mags = vec![0.0; target.values.as_slice().len()];
    let mut signal = processor.istft(&estimate)?;
    let mut rebuilt = processor.stft(&signal, target.sample_rate)?;
    for _ in 0..iterations {
        for ((x, &s), r) in estimate
            .values
            .as_mut_slice()
            .iter_mut()
            .zip(target.values.as_slice())
            .zip(rebuilt.values.as_slice())
        {
            *x = r * (s / (r.norm() + phase_epsilon));
        }
        signal = processor.istft(&estimate)?;
        rebuilt = processor.stft(&signal, target.sample_rate)?;
        for (mag, c) in mags.iter_mut().zip(rebuilt.values.as_slice()) {
            *mag = c.norm();
        }
        convergence.push(spectral_convergence(&mags, target.values.as_slice()));
    }
    Ok(GriffinLimRun {
        samples: signal,
        convergence,
    })
}

/// Zero-phase Griffin-Lim with the convergence trace.
pub fn griffin_lim_traced(
    target: &MagnitudeSpectrogram,
    config: &SynthesisConfig,
) -> Result<GriffinLimRun> {
    config.validate()?;
    let initial = target.values.map(|&s| Complex64::new(s, 0.0));
    griffin_lim_from(target, initial, config.gl_iterations, config.phase_epsilon)
}

/// Zero-phase Griffin-Lim, peak-normalized.
pub fn griffin_lim(target: &MagnitudeSpectrogram, config: &SynthesisConfig) -> Result<AudioBuffer> {
    let run = griffin_lim_traced(target, config)?;
    Ok(normalize(&AudioBuffer::new(
        run.samples,
        target.sample_rate,
        "griffin_lim",
    )))
}

/// Analysis-synthesis loop: STFT, mel projection, mel inversion, Griffin-Lim.
pub fn synthesize(
    audio: &AudioBuffer,
    stft_config: &StftConfig,
    fb: &MelFilterbank,
    config: &SynthesisConfig,
) -> Result<AudioBuffer> {
    config.validate()?;
    let mel = mel_spectrogram(&magnitude(&stft(audio, stft_config)?), fb)?;
    let target = estimate_linear(&mel, fb, config)?;
    let mut out = griffin_lim(&target, config)?;
    out.source_name = format!("{}_synth", audio.source_name);
    Ok(out)
}
