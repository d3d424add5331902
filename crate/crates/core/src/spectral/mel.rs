use std::f64::consts::PI;

use crate::{Error, Result};

use super::{FeatureTimeSeries, FrameGrid, MagnitudeSpectrogram, MelSpectrogram};

/// Power floor before the dB conversion.
pub const DB_FLOOR: f64 = 1e-10;
/// Dynamic range kept below the global peak, in dB.
pub const TOP_DB: f64 = 80.0;

const F_SP: f64 = 200.0 / 3.0;
const MIN_LOG_HZ: f64 = 1000.0;
const MIN_LOG_MEL: f64 = MIN_LOG_HZ / F_SP;

fn log_step() -> f64 {
    6.4f64.ln() / 27.0
}

/// Slaney mel scale: linear below 1 kHz, logarithmic above.
pub fn hz_to_mel(hz: f64) -> f64 {
    if hz >= MIN_LOG_HZ {
        MIN_LOG_MEL + (hz / MIN_LOG_HZ).ln() / log_step()
    } else {
        hz / F_SP
    }
}

pub fn mel_to_hz(mel: f64) -> f64 {
    if mel >= MIN_LOG_MEL {
        MIN_LOG_HZ * (log_step() * (mel - MIN_LOG_MEL)).exp()
    } else {
        mel * F_SP
    }
}

/// Triangular mel filters, `bands` rows by `bins` columns, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    pub weights: Vec<f64>,
    pub bands: usize,
    pub bins: usize,
    pub sample_rate: u32,
    pub f_min: f64,
    pub f_max: f64,
    /// Half-open column range holding each row's nonzero weights.
    support: Vec<(usize, usize)>,
}

impl MelFilterbank {
    /// Builds a bank from explicit weights (used for toy banks in tests and
    /// by callers that bring their own filters).
    pub fn from_weights(
        bands: usize,
        bins: usize,
        sample_rate: u32,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if weights.len() != bands * bins {
            return Err(Error::ShapeMismatch {
                expected: bands * bins,
                actual: weights.len(),
            });
        }
        let support = (0..bands)
            .map(|b| {
                let row = &weights[b * bins..(b + 1) * bins];
                match (
                    row.iter().position(|&w| w != 0.0),
                    row.iter().rposition(|&w| w != 0.0),
                ) {
                    (Some(lo), Some(hi)) => (lo, hi + 1),
                    _ => (0, 0),
                }
            })
            .collect();
        Ok(Self {
            weights,
            bands,
            bins,
            sample_rate,
            f_min: 0.0,
            f_max: sample_rate as f64 / 2.0,
            support,
        })
    }

    pub fn row(&self, band: usize) -> &[f64] {
        &self.weights[band * self.bins..(band + 1) * self.bins]
    }

    pub fn weight(&self, band: usize, bin: usize) -> f64 {
        self.weights[band * self.bins + bin]
    }

    pub fn support(&self, band: usize) -> (usize, usize) {
        self.support[band]
    }

    /// Bin index of each filter's largest weight.
    pub fn peak_bins(&self) -> Vec<usize> {
        (0..self.bands)
            .map(|b| {
                let row = self.row(b);
                (0..self.bins)
                    .max_by(|&i, &j| row[i].total_cmp(&row[j]).then(j.cmp(&i)))
                    .unwrap_or(0)
            })
            .collect()
    }
}

/// Slaney-style mel filterbank with area normalization.
///
/// `bins` is the one-sided FFT size `W / 2 + 1`; the centre frequencies are
/// `bands + 2` points spaced evenly in mel between `f_min` and `f_max`.
pub fn build_mel_filterbank(
    bands: usize,
    bins: usize,
    sample_rate: u32,
    f_min: f64,
    f_max: f64,
) -> Result<MelFilterbank> {
    let nyquist = sample_rate as f64 / 2.0;
    if !(f_min >= 0.0 && f_min < f_max && f_max <= nyquist) {
        return Err(Error::InvalidRange { f_min, f_max });
    }
    if bands == 0 || bins < 2 {
        return Err(Error::InvalidConfig(
            "filterbank needs at least one band and two bins".into(),
        ));
    }
    let win = 2 * (bins - 1);
    let fft_freqs: Vec<f64> = (0..bins)
        .map(|k| k as f64 * sample_rate as f64 / win as f64)
        .collect();
    let (mel_lo, mel_hi) = (hz_to_mel(f_min), hz_to_mel(f_max));
    let edges: Vec<f64> = (0..bands + 2)
        .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (bands + 1) as f64))
        .collect();

    let mut weights = vec![0.0; bands * bins];
    for b in 0..bands {
        let (lower, centre, upper) = (edges[b], edges[b + 1], edges[b + 2]);
        let norm = 2.0 / (upper - lower);
        for (k, &f) in fft_freqs.iter().enumerate() {
            let rising = (f - lower) / (centre - lower);
            let falling = (upper - f) / (upper - centre);
            let w = rising.min(falling).max(0.0);
            weights[b * bins + k] = w * norm;
        }
    }
    let mut bank = MelFilterbank::from_weights(bands, bins, sample_rate, weights)?;
    bank.f_min = f_min;
    bank.f_max = f_max;
    Ok(bank)
}

/// `S_mel[b, m] = sum_k M[b, k] * S[k, m]^2`.
pub fn mel_spectrogram(mag: &MagnitudeSpectrogram, fb: &MelFilterbank) -> Result<MelSpectrogram> {
    if mag.bins() != fb.bins {
        return Err(Error::ShapeMismatch {
            expected: fb.bins,
            actual: mag.bins(),
        });
    }
    let mut values = FrameGrid::filled(fb.bands, mag.frames(), 0.0);
    let mut power = vec![0.0; fb.bins];
    for m in 0..mag.frames() {
        for (p, &s) in power.iter_mut().zip(mag.values.frame(m)) {
            *p = s * s;
        }
        let out = values.frame_mut(m);
        for (b, slot) in out.iter_mut().enumerate() {
            let (lo, hi) = fb.support(b);
            *slot = fb.row(b)[lo..hi]
                .iter()
                .zip(&power[lo..hi])
                .map(|(w, p)| w * p)
                .sum();
        }
    }
    Ok(MelSpectrogram {
        values,
        sample_rate: mag.sample_rate,
        config: mag.config,
        signal_len: mag.signal_len,
    })
}

/// `10 log10(max(p, 1e-10))`, clamped to `[peak - 80 dB, peak]` where the peak
/// is taken over the whole input.
pub fn power_to_db(power: &[f64]) -> Vec<f64> {
    let db: Vec<f64> = power
        .iter()
        .map(|&p| 10.0 * p.max(DB_FLOOR).log10())
        .collect();
    let peak = db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    db.into_iter().map(|v| v.max(peak - TOP_DB)).collect()
}

/// Orthonormal DCT-II basis, `count` rows of length `n`.
fn dct_basis(count: usize, n: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| {
            let scale = if k == 0 {
                (1.0 / n as f64).sqrt()
            } else {
                (2.0 / n as f64).sqrt()
            };
            (0..n)
                .map(|b| scale * (PI * k as f64 * (2 * b + 1) as f64 / (2 * n) as f64).cos())
                .collect()
        })
        .collect()
}

/// Mel-frequency cepstral coefficients: dB mel power, then an orthonormal
/// DCT-II across bands, keeping the first `coefficient_count` terms.
pub fn mfcc(mel: &MelSpectrogram, coefficient_count: usize) -> FeatureTimeSeries {
    let bands = mel.bands();
    let count = coefficient_count.min(bands);
    let db = power_to_db(mel.values.as_slice());
    let basis = dct_basis(count, bands);
    let mut data = Vec::with_capacity(count * mel.frames());
    for frame in db.chunks_exact(bands.max(1)).take(mel.frames()) {
        data.extend(
            basis
                .iter()
                .map(|row| row.iter().zip(frame).map(|(c, v)| c * v).sum::<f64>()),
        );
    }
    FeatureTimeSeries {
        name: "mfcc".into(),
        frame_times: mel.config.frame_times(mel.frames(), mel.sample_rate),
        values: FrameGrid::from_vec(count, mel.frames(), data).expect("shape computed above"),
    }
}
