use serde::{Deserialize, Serialize};

use super::beta::beta_quantile;
use super::PitchConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub frequency: f64,
    pub probability: f64,
}

/// Candidate pitches for one frame plus the mass left for "unvoiced".
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameCandidates {
    pub candidates: Vec<Candidate>,
    pub unvoiced: f64,
}

impl FrameCandidates {
    pub fn unvoiced_frame() -> Self {
        Self {
            candidates: Vec::new(),
            unvoiced: 1.0,
        }
    }

    pub fn voiced_mass(&self) -> f64 {
        self.candidates.iter().map(|c| c.probability).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CandidateLattice {
    pub frame_times: Vec<f64>,
    pub frames: Vec<FrameCandidates>,
}

impl CandidateLattice {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Threshold grid: Beta quantiles at the midpoints `(i + 0.5) / N`, each
/// carrying prior mass `1 / N`.
#[derive(Debug, Clone)]
pub struct ThresholdPrior {
    pub thresholds: Vec<f64>,
    pub mass: f64,
}

impl ThresholdPrior {
    pub fn new(count: usize, a: f64, b: f64) -> Self {
        let n = count as f64;
        Self {
            thresholds: (0..count)
                .map(|i| beta_quantile((i as f64 + 0.5) / n, a, b))
                .collect(),
            mass: 1.0 / n,
        }
    }
}

/// Admissible lag range `[ceil(fs / f_max), floor(fs / f_min)]`.
pub fn lag_range(sample_rate: u32, f_min: f64, f_max: f64) -> (usize, usize) {
    let fs = sample_rate as f64;
    let lo = ((fs / f_max).ceil() as usize).max(1);
    let hi = (fs / f_min).floor() as usize;
    (lo, hi.max(lo))
}

/// Troughs of `dp` inside `[lo, hi]`: strictly below the left neighbour and
/// not above the right one. Lags past the end of `dp` are never troughs.
fn troughs(dp: &[f64], lo: usize, hi: usize) -> Vec<usize> {
    let hi = hi.min(dp.len().saturating_sub(1));
    (lo.max(1)..=hi)
        .filter(|&t| {
            let right_ok = t + 1 >= dp.len() || dp[t] <= dp[t + 1];
            dp[t] < dp[t - 1] && right_ok
        })
        .collect()
}

/// Parabolic vertex offset through `(t-1, t, t+1)`, clamped to +-0.5.
fn parabolic_offset(dp: &[f64], t: usize) -> f64 {
    if t == 0 || t + 1 >= dp.len() {
        return 0.0;
    }
    let (a, b, c) = (dp[t - 1], dp[t], dp[t + 1]);
    let denom = a - 2.0 * b + c;
    if denom.abs() < f64::EPSILON * (a.abs() + b.abs() + c.abs()).max(f64::MIN_POSITIVE) {
        return 0.0;
    }
    (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
}

/// Converts one frame's cumulative mean normalized difference into weighted
/// pitch candidates.
pub fn pitch_candidates(
    dp: &[f64],
    sample_rate: u32,
    config: &PitchConfig,
    prior: &ThresholdPrior,
) -> FrameCandidates {
    let (lo, hi) = lag_range(sample_rate, config.f_min, config.f_max);
    let troughs = troughs(dp, lo, hi);
    if troughs.is_empty() {
        return FrameCandidates::unvoiced_frame();
    }

    let mut weights = vec![0.0; troughs.len()];
    let mut orphan = 0.0;
    for &s in &prior.thresholds {
        match troughs.iter().position(|&t| dp[t] < s) {
            Some(i) => weights[i] += prior.mass,
            None => orphan += prior.mass,
        }
    }
    if orphan > 0.0 {
        let best = (0..troughs.len())
            .min_by(|&a, &b| dp[troughs[a]].total_cmp(&dp[troughs[b]]))
            .expect("non-empty troughs");
        weights[best] += config.no_trough_prob * orphan;
    }

    let fs = sample_rate as f64;
    let candidates: Vec<Candidate> = troughs
        .iter()
        .zip(&weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&t, &w)| {
            let lag = t as f64 + parabolic_offset(dp, t);
            Candidate {
                frequency: (fs / lag).clamp(config.f_min, config.f_max),
                probability: w,
            }
        })
        .collect();
    let voiced: f64 = candidates.iter().map(|c| c.probability).sum();
    FrameCandidates {
        candidates,
        unvoiced: (1.0 - voiced).max(0.0),
    }
}
