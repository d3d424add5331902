//! Shared test fixtures and oracles.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soundplot::audio::{write_wav_16, AudioBuffer};

pub const SR: u32 = 22_050;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sine(freq: f64, seconds: f64, amp: f64) -> AudioBuffer {
    let n = (seconds * SR as f64).round() as usize;
    let samples = (0..n)
        .map(|i| amp * (2.0 * PI * freq * i as f64 / SR as f64).sin())
        .collect();
    AudioBuffer::new(samples, SR, "sine")
}

pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()
}

/// Raised-cosine fade over the first and last `fade` seconds of a note.
fn envelope(t: f64, dur: f64, fade: f64) -> f64 {
    let edge = t.min(dur - t).max(0.0);
    if edge >= fade {
        1.0
    } else {
        0.5 - 0.5 * (PI * edge / fade).cos()
    }
}

/// Adds a linear chirp from `f0` to `f1` Hz with a weak second harmonic.
fn add_chirp(out: &mut [f64], start: f64, dur: f64, f0: f64, f1: f64, amp: f64) {
    let sr = SR as f64;
    let first = (start * sr).round() as usize;
    let n = (dur * sr).round() as usize;
    for i in 0..n {
        let t = i as f64 / sr;
        let phase = 2.0 * PI * (f0 * t + 0.5 * (f1 - f0) / dur * t * t);
        let env = amp * envelope(t, dur, 0.02);
        out[first + i] += env * (phase.sin() + 0.3 * (2.0 * phase).sin());
    }
}

/// Deterministic 3 s birdsong-like clip: a rising chirp, a falling chirp and
/// a trill of short notes, over faint seeded noise. Peak-normalized.
pub fn birdsong() -> AudioBuffer {
    let n = 3 * SR as usize;
    let mut x = vec![0.0; n];
    add_chirp(&mut x, 0.15, 0.7, 900.0, 1800.0, 0.8);
    add_chirp(&mut x, 1.0, 0.6, 2000.0, 1100.0, 0.7);
    for k in 0..9 {
        let f = if k % 2 == 0 { 1500.0 } else { 1650.0 };
        add_chirp(&mut x, 1.85 + k as f64 * 0.11, 0.07, f, f * 1.08, 0.6);
    }
    let mut r = rng(2024);
    for s in &mut x {
        *s += 2e-3 * r.gen_range(-1.0..1.0);
    }
    let peak = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    AudioBuffer::new(x.iter().map(|v| v / peak).collect(), SR, "birdsong")
}

pub fn write_fixture(path: &Path) {
    write_wav_16(path, &birdsong()).unwrap();
}

/// `‖a − b‖ / ‖b‖`.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

// ---------------------------------------------------------------- oracles

use num_complex::Complex64;
use soundplot::embedding::fit_pca;
use soundplot::pitch::{
    bin_count, Candidate, CandidateLattice, FrameCandidates, PitchConfig, PitchHmm,
};

/// Naive one-sided DFT of a real frame, O(N²).
pub fn naive_dft(frame: &[f64]) -> Vec<Complex64> {
    let n = frame.len();
    (0..=n / 2)
        .map(|k| {
            frame
                .iter()
                .enumerate()
                .map(|(t, &x)| {
                    let angle = -2.0 * PI * (k * t % n) as f64 / n as f64;
                    Complex64::from_polar(x, angle)
                })
                .sum()
        })
        .collect()
}

/// Periodic Hann window, written out independently of the library.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Sample covariance (divisor M − 1) of `frames` by plain loops.
pub fn naive_covariance(frames: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = frames[0].len();
    let m = frames.len() as f64;
    let mean: Vec<f64> = (0..d)
        .map(|i| frames.iter().map(|f| f[i]).sum::<f64>() / m)
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    for f in frames {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += (f[i] - mean[i]) * (f[j] - mean[j]);
            }
        }
    }
    for row in &mut cov {
        for v in row.iter_mut() {
            *v /= m - 1.0;
        }
    }
    cov
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    eig
}

// ------------------------------------------------------------ pitch oracle

/// Pitch settings with exactly `bins` semitone-wide bins above 100 Hz.
pub fn tiny_pitch_config(bins: usize, max_jump: usize) -> PitchConfig {
    PitchConfig {
        f_min: 100.0,
        f_max: 100.0 * ((bins as f64 - 0.5) / 12.0).exp2(),
        bins_per_semitone: 1,
        max_semitones_per_frame: max_jump,
        ..PitchConfig::default()
    }
}

/// Up to three candidates per frame; voiced mass in `[0.05, 0.95]`.
pub fn random_lattice(r: &mut ChaCha8Rng, frames: usize, cfg: &PitchConfig) -> CandidateLattice {
    let frames = (0..frames)
        .map(|_| {
            let k = r.gen_range(0..=3);
            let mass = r.gen_range(0.05..0.95);
            let weights: Vec<f64> = (0..k).map(|_| r.gen_range(0.1..1.0)).collect();
            let total: f64 = weights.iter().sum();
            let candidates: Vec<Candidate> = weights
                .iter()
                .map(|w| Candidate {
                    frequency: r.gen_range(cfg.f_min..cfg.f_max),
                    probability: w / total * mass,
                })
                .collect();
            let unvoiced = 1.0 - candidates.iter().map(|c| c.probability).sum::<f64>();
            FrameCandidates {
                candidates,
                unvoiced,
            }
        })
        .collect::<Vec<_>>();
    CandidateLattice {
        frame_times: (0..frames.len()).map(|i| i as f64 * 0.02).collect(),
        frames,
    }
}

/// Log-probability of a state path, rebuilt from the model definition:
/// states `0..n` voiced and `n..2n` unvoiced over semitone bins, uniform
/// start, triangular bin kernel normalized per source bin, voicing switch
/// probability, emissions from candidate mass snapped to the nearest bin.
pub fn oracle_path_score(lattice: &CandidateLattice, cfg: &PitchConfig, path: &[usize]) -> f64 {
    let per_octave = 12.0 * cfg.bins_per_semitone as f64;
    let n = (per_octave * (cfg.f_max / cfg.f_min).log2()).floor() as usize + 1;
    let w = cfg.max_semitones_per_frame * cfg.bins_per_semitone;
    let tri = |a: usize, b: usize| {
        let d = a.abs_diff(b);
        if d > w {
            0.0
        } else {
            (w + 1 - d) as f64
        }
    };
    let trans = |from: usize, to: usize| {
        let row: f64 = (0..n).map(|j| tri(from % n, j)).sum();
        let p = tri(from % n, to % n) / row;
        let stay = (from < n) == (to < n);
        p * if stay {
            1.0 - cfg.switch_prob
        } else {
            cfg.switch_prob
        }
    };
    let emit = |t: usize, s: usize| {
        let frame = &lattice.frames[t];
        let mass: f64 = frame.candidates.iter().map(|c| c.probability).sum();
        if s >= n {
            return (1.0 - mass) / n as f64;
        }
        frame
            .candidates
            .iter()
            .filter(|c| {
                let pos = (per_octave * (c.frequency / cfg.f_min).log2()).round();
                (pos.max(0.0) as usize).min(n - 1) == s
            })
            .map(|c| c.probability)
            .sum()
    };
    let mut score = -((2 * n) as f64).ln() + emit(0, path[0]).ln();
    for t in 1..path.len() {
        score += trans(path[t - 1], path[t]).ln() + emit(t, path[t]).ln();
    }
    score
}

/// Best path by enumerating every state sequence. Returns the best score,
/// its path and whether it is unique (runner-up more than `1e-9` below).
pub fn exhaustive_best(lattice: &CandidateLattice, cfg: &PitchConfig) -> (f64, Vec<usize>, bool) {
    let states = 2 * bin_count(cfg);
    let frames = lattice.len();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut runner_up = f64::NEG_INFINITY;
    let mut path = vec![0usize; frames];
    loop {
        let score = oracle_path_score(lattice, cfg, &path);
        if score > best.0 {
            runner_up = best.0;
            best = (score, path.clone());
        } else if score > runner_up {
            runner_up = score;
        }
        let mut t = frames;
        loop {
            if t == 0 {
                return (best.0, best.1, best.0 - runner_up > 1e-9);
            }
            t -= 1;
            path[t] += 1;
            if path[t] < states {
                break;
            }
            path[t] = 0;
        }
    }
}

/// Decodes `count` random lattices and compares against exhaustive search.
/// Returns the number of lattices checked or the first disagreement.
pub fn viterbi_matches_exhaustive(seed: u64, count: usize) -> Result<usize, String> {
    let mut r = rng(seed);
    for case in 0..count {
        let cfg = tiny_pitch_config(r.gen_range(1..=4), r.gen_range(1..=2));
        let frames = r.gen_range(1..=5);
        let lattice = random_lattice(&mut r, frames, &cfg);
        let path = PitchHmm::new(&lattice, &cfg).decode();
        let (best, best_path, unique) = exhaustive_best(&lattice, &cfg);
        let got = oracle_path_score(&lattice, &cfg, &path);
        if (got - best).abs() > 1e-9 || got.is_nan() {
            return Err(format!(
                "case {case}: decoded score {got} vs optimum {best}"
            ));
        }
        if unique && path != best_path {
            return Err(format!(
                "case {case}: path {path:?} vs unique optimum {best_path:?}"
            ));
        }
    }
    Ok(count)
}

// -------------------------------------------------------------- PCA oracle

/// `m` frames of `d` correlated features: Gaussian-ish sources through a
/// random mixing matrix plus an offset.
pub fn correlated_frames(r: &mut ChaCha8Rng, m: usize, d: usize) -> Vec<Vec<f64>> {
    let mix: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..d).map(|_| r.gen_range(-1.0..1.0)).collect())
        .collect();
    let offset: Vec<f64> = (0..d).map(|_| r.gen_range(-20.0..20.0)).collect();
    (0..m)
        .map(|_| {
            let z: Vec<f64> = (0..d)
                .map(|k| (0..4).map(|_| r.gen_range(-1.0..1.0)).sum::<f64>() * (d - k) as f64)
                .collect();
            (0..d)
                .map(|i| offset[i] + (0..d).map(|k| mix[i][k] * z[k]).sum::<f64>())
                .collect()
        })
        .collect()
}

/// Worst relative disagreement between `fit_pca` and the Jacobi oracle over
/// `count` random 200 x 13 data sets: eigenvalues, eigen-residuals
/// `|C v - lambda v|` and orthonormality. Also fails on sign instability.
pub fn pca_oracle_error(seed: u64, count: usize) -> Result<f64, String> {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for case in 0..count {
        let data = correlated_frames(&mut r, 200, 13);
        let model = fit_pca(&data, 2).map_err(|e| e.to_string())?;
        if fit_pca(&data, 2).map_err(|e| e.to_string())? != model {
            return Err(format!("case {case}: refit differs"));
        }
        let cov = naive_covariance(&data);
        let eig = jacobi_eigenvalues(cov.clone());
        let scale = eig[0];
        for (k, v) in model.components.iter().enumerate() {
            worst = worst.max((model.explained_variance[k] - eig[k]).abs() / scale);
            let residual = (0..13)
                .map(|i| {
                    let cv: f64 = (0..13).map(|j| cov[i][j] * v[j]).sum();
                    (cv - eig[k] * v[i]).powi(2)
                })
                .sum::<f64>()
                .sqrt();
            worst = worst.max(residual / scale);
            let norm: f64 = v.iter().map(|x| x * x).sum();
            worst = worst.max((norm - 1.0).abs());
            let pivot = v
                .iter()
                .copied()
                .fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            if pivot <= 0.0 {
                return Err(format!(
                    "case {case}: component {k} largest entry is negative"
                ));
            }
        }
        let dot: f64 = model.components[0]
            .iter()
            .zip(&model.components[1])
            .map(|(a, b)| a * b)
            .sum();
        worst = worst.max(dot.abs());
    }
    Ok(worst)
}

// ----------------------------------------------------------- golden figures

use soundplot::embedding::PairedEmbedding;
use soundplot::metrics::QualityMetrics;
use soundplot::render::{self, ComparisonInputs, RasterImage};
use soundplot::spectral::{
    build_mel_filterbank, magnitude, mel_spectrogram, stft, FrameGrid, StftConfig,
};

pub fn golden_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Every golden render, by file name. Inputs use integer arithmetic or fixed
/// tables wherever possible so the pixels do not hinge on libm rounding.
pub fn golden_renders() -> Vec<(&'static str, RasterImage)> {
    let grid = FrameGrid::from_vec(
        16,
        24,
        (0..16 * 24).map(|i| ((i * 7) % 17) as f64).collect(),
    )
    .unwrap();
    let power = FrameGrid::from_vec(
        16,
        24,
        (0..16 * 24)
            .map(|i| ((i % 16 + 1) * (i / 16 + 1)) as f64)
            .collect(),
    )
    .unwrap();
    let triangle: Vec<f64> = (0..4000)
        .map(|i| {
            let p = (i % 200) as f64 / 100.0;
            if p < 1.0 {
                2.0 * p - 1.0
            } else {
                3.0 - 2.0 * p
            }
        })
        .collect();
    let embedding = PairedEmbedding {
        original_points: (0..12).map(|i| [i as f64, (i * i % 7) as f64]).collect(),
        synthesized_points: (0..10)
            .map(|i| [i as f64 + 0.5, (i * 3 % 5) as f64 - 1.0])
            .collect(),
        pairs: (0..10).map(|i| (i, i)).collect(),
    };
    vec![
        (
            "heatmap.png",
            render::render_heatmap(&grid, false, 240, 160).unwrap(),
        ),
        (
            "heatmap_db.png",
            render::render_heatmap(&power, true, 240, 160).unwrap(),
        ),
        (
            "waveform.png",
            render::render_waveform(&triangle, 300, 100).unwrap(),
        ),
        (
            "embedding.png",
            render::render_embedding(&embedding).unwrap(),
        ),
        ("comparison.png", golden_comparison()),
    ]
}

fn golden_comparison() -> RasterImage {
    let cfg = StftConfig::default();
    let fb = build_mel_filterbank(128, cfg.bins(), SR, 0.0, SR as f64 / 2.0).unwrap();
    // Square-ish pulse train and a quieter copy, 0.5 s each.
    let a: Vec<f64> = (0..11_025)
        .map(|i| if (i / 25) % 2 == 0 { 0.5 } else { -0.5 })
        .collect();
    let b: Vec<f64> = a
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 3 == 0 { v * 0.5 } else { *v })
        .collect();
    let (a, b) = (AudioBuffer::new(a, SR, "a"), AudioBuffer::new(b, SR, "b"));
    let (sa, sb) = (
        magnitude(&stft(&a, &cfg).unwrap()),
        magnitude(&stft(&b, &cfg).unwrap()),
    );
    let (ma, mb) = (
        mel_spectrogram(&sa, &fb).unwrap(),
        mel_spectrogram(&sb, &fb).unwrap(),
    );
    let metrics = QualityMetrics {
        snr_db: -1.234,
        waveform_corr: 0.0123,
        spectral_corr: 0.5661,
        mel_corr: 0.929,
        aligned_length: 11_025,
    };
    render::render_comparison(&ComparisonInputs {
        original: &a,
        synthesized: &b,
        original_spectrum: &sa,
        synthesized_spectrum: &sb,
        original_mel: &ma,
        synthesized_mel: &mb,
        metrics: &metrics,
    })
    .unwrap()
}

/// Compares renders with tests/golden; `SOUNDPLOT_BLESS=1` rewrites them.
/// Returns the names that differ or are missing.
pub fn check_goldens() -> Vec<String> {
    let dir = golden_dir();
    let bless = std::env::var_os("SOUNDPLOT_BLESS").is_some();
    let mut bad = Vec::new();
    for (name, img) in golden_renders() {
        let bytes = img.to_png_bytes().unwrap();
        let path = dir.join(name);
        if bless {
            std::fs::create_dir_all(&dir).unwrap();
            std::fs::write(&path, &bytes).unwrap();
        } else if std::fs::read(&path).ok().as_deref() != Some(&bytes[..]) {
            bad.push(name.to_string());
        }
    }
    bad
}
