use crate::audio::AudioBuffer;
use crate::embedding::PairedEmbedding;
use crate::metrics::QualityMetrics;
use crate::spectral::{power_to_db, FrameGrid, MagnitudeSpectrogram, MelSpectrogram};
use crate::{Error, Result};

use super::colormap::VIRIDIS;
use super::{RasterImage, Rgb, BLACK, WHITE};

pub const COMPARISON_SIZE: (usize, usize) = (1600, 1200);
pub const EMBEDDING_SIZE: (usize, usize) = (1800, 600);

pub const BLUE: Rgb = [31, 119, 180];
pub const GREEN: Rgb = [44, 160, 44];
pub const GRAY: Rgb = [160, 160, 160];

const GUTTER: usize = 10;
const PANEL_W: usize = 785;
const PANEL_H: usize = 372;
const WAVE_COLOR: Rgb = [31, 60, 120];

/// Colormap index for `v` inside `[min, max]`; `min == max` maps to 0.
fn color_index(v: f64, min: f64, max: f64) -> usize {
    if !(max > min) {
        return 0;
    }
    (((v - min) / (max - min)).clamp(0.0, 1.0) * 255.0).round() as usize
}

/// Heatmap of a `rows x frames` grid. With `db_scale` the values are treated
/// as power and converted to dB (1e-10 floor, 80 dB below the peak) first.
/// Row 0 is drawn at the bottom.
pub fn render_heatmap(
    grid: &FrameGrid<f64>,
    db_scale: bool,
    width: usize,
    height: usize,
) -> Result<RasterImage> {
    let (rows, cols) = (grid.height(), grid.frames());
    if rows == 0 || cols == 0 {
        return Err(Error::EmptySignal);
    }
    let values = if db_scale {
        power_to_db(grid.as_slice())
    } else {
        grid.as_slice().to_vec()
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut img = RasterImage::new(width, height, BLACK)?;
    for py in 0..height {
        let row = (height - 1 - py) * rows / height;
        for px in 0..width {
            let col = px * cols / width;
            let v = values[col * rows + row];
            img.set(px as i64, py as i64, VIRIDIS[color_index(v, min, max)]);
        }
    }
    Ok(img)
}

fn wave_y(v: f64, height: usize) -> i64 {
    ((1.0 - v.clamp(-1.0, 1.0)) * 0.5 * (height - 1) as f64).round() as i64
}

/// Min/max envelope per pixel column on white.
pub fn render_waveform(samples: &[f64], width: usize, height: usize) -> Result<RasterImage> {
    let mut img = RasterImage::new(width, height, WHITE)?;
    let n = samples.len();
    for px in 0..width {
        let (lo, hi) = if n == 0 {
            (0.0, 0.0)
        } else {
            let start = (px * n / width).min(n - 1);
            let end = ((px + 1) * n / width).clamp(start + 1, n);
            samples[start..end]
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                    (a.min(v), b.max(v))
                })
        };
        let (top, bottom) = (wave_y(hi, height), wave_y(lo, height));
        for y in top..=bottom {
            img.set(px as i64, y, WAVE_COLOR);
        }
    }
    Ok(img)
}

pub struct ComparisonInputs<'a> {
    pub original: &'a AudioBuffer,
    pub synthesized: &'a AudioBuffer,
    pub original_spectrum: &'a MagnitudeSpectrogram,
    pub synthesized_spectrum: &'a MagnitudeSpectrogram,
    pub original_mel: &'a MelSpectrogram,
    pub synthesized_mel: &'a MelSpectrogram,
    pub metrics: &'a QualityMetrics,
}

/// Text of the metrics strip under the comparison panels.
pub fn metrics_caption(m: &QualityMetrics) -> String {
    format!(
        "SNR: {:.2} DB   WAVEFORM CORR: {:.4}   SPECTRAL CORR: {:.4}   MEL CORR: {:.4}",
        m.snr_db, m.waveform_corr, m.spectral_corr, m.mel_corr
    )
}

/// Top-left corner of comparison panel `(row, col)`.
pub fn comparison_panel_origin(row: usize, col: usize) -> (usize, usize) {
    (
        GUTTER + col * (PANEL_W + GUTTER),
        GUTTER + row * (PANEL_H + GUTTER),
    )
}

pub const COMPARISON_PANEL: (usize, usize) = (PANEL_W, PANEL_H);

/// Top of the metrics strip.
pub const COMPARISON_STRIP_Y: usize = GUTTER + 3 * (PANEL_H + GUTTER);

/// 3x2 grid (waveform, STFT dB, mel dB by original / synthesized) over a
/// metrics strip. Panel titles sit in the gutters above each panel.
pub fn render_comparison(inputs: &ComparisonInputs<'_>) -> Result<RasterImage> {
    let (w, h) = COMPARISON_SIZE;
    let mut canvas = RasterImage::new(w, h, WHITE)?;
    let power = |s: &MagnitudeSpectrogram| s.values.map(|v| v * v);
    let columns = [
        (
            "ORIGINAL",
            inputs.original,
            power(inputs.original_spectrum),
            inputs.original_mel,
        ),
        (
            "SYNTHESIZED",
            inputs.synthesized,
            power(inputs.synthesized_spectrum),
            inputs.synthesized_mel,
        ),
    ];
    for (col, (label, audio, spectrum, mel)) in columns.iter().enumerate() {
        let panels = [
            (
                format!("{label} WAVEFORM"),
                render_waveform(&audio.samples, PANEL_W, PANEL_H)?,
            ),
            (
                format!("{label} STFT (DB)"),
                render_heatmap(spectrum, true, PANEL_W, PANEL_H)?,
            ),
            (
                format!("{label} MEL (DB)"),
                render_heatmap(&mel.values, true, PANEL_W, PANEL_H)?,
            ),
        ];
        for (row, (title, panel)) in panels.iter().enumerate() {
            let (x, y) = comparison_panel_origin(row, col);
            canvas.blit(panel, x as i64, y as i64);
            canvas.text(x as i64, (y - GUTTER + 2) as i64, title, 1, BLACK);
        }
    }
    canvas.text(
        GUTTER as i64,
        (COMPARISON_STRIP_Y + 10) as i64,
        &metrics_caption(inputs.metrics),
        2,
        BLACK,
    );
    Ok(canvas)
}

/// Affine map from embedding coordinates to pixels of one plot area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotTransform {
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
    /// Plot area top-left pixel and size.
    pub origin: (i64, i64),
    pub size: (usize, usize),
}

impl PlotTransform {
    pub fn to_pixel(&self, p: [f64; 2]) -> (i64, i64) {
        let (u0, u1) = self.u_range;
        let (v0, v1) = self.v_range;
        let fx = (p[0] - u0) / (u1 - u0) * (self.size.0 - 1) as f64;
        let fy = (v1 - p[1]) / (v1 - v0) * (self.size.1 - 1) as f64;
        (
            self.origin.0 + fx.round() as i64,
            self.origin.1 + fy.round() as i64,
        )
    }
}

const PLOT_INSET: usize = 40;
const PLOT_SIZE: usize = 520;
const MARKER_RADIUS: i64 = 2;

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    };
    let margin = 0.05 * (hi - lo);
    (lo - margin, hi + margin)
}

/// Transform of panel `panel` (0..3): shared bounding box of every point plus
/// a 5% margin on each side.
pub fn embedding_transform(embedding: &PairedEmbedding, panel: usize) -> Result<PlotTransform> {
    let points: Vec<[f64; 2]> = embedding
        .original_points
        .iter()
        .chain(&embedding.synthesized_points)
        .copied()
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyEmbedding);
    }
    let panel_w = EMBEDDING_SIZE.0 / 3;
    Ok(PlotTransform {
        u_range: padded_range(points.iter().map(|p| p[0])),
        v_range: padded_range(points.iter().map(|p| p[1])),
        origin: ((panel * panel_w + PLOT_INSET) as i64, PLOT_INSET as i64),
        size: (PLOT_SIZE, PLOT_SIZE),
    })
}

fn marker(img: &mut RasterImage, (x, y): (i64, i64), color: Rgb) {
    let side = (2 * MARKER_RADIUS + 1) as usize;
    img.fill_rect(x - MARKER_RADIUS, y - MARKER_RADIUS, side, side, color);
}

/// Original-only, synthesized-only and overlay panels; the overlay links
/// paired frames with gray segments under the points.
pub fn render_embedding(embedding: &PairedEmbedding) -> Result<RasterImage> {
    let (w, h) = EMBEDDING_SIZE;
    let mut canvas = RasterImage::new(w, h, WHITE)?;
    let titles = ["ORIGINAL", "SYNTHESIZED", "OVERLAY"];
    for (panel, title) in titles.iter().enumerate() {
        let t = embedding_transform(embedding, panel)?;
        canvas.stroke_rect(
            t.origin.0 - 1,
            t.origin.1 - 1,
            t.size.0 + 2,
            t.size.1 + 2,
            BLACK,
        );
        canvas.text(t.origin.0, 14, title, 2, BLACK);
        if panel == 2 {
            for &(i, j) in &embedding.pairs {
                let a = t.to_pixel(embedding.original_points[i]);
                let b = t.to_pixel(embedding.synthesized_points[j]);
                canvas.line(a, b, GRAY);
            }
        }
        if panel != 1 {
            for &p in &embedding.original_points {
                marker(&mut canvas, t.to_pixel(p), BLUE);
            }
        }
        if panel != 0 {
            for &p in &embedding.synthesized_points {
                marker(&mut canvas, t.to_pixel(p), GREEN);
            }
        }
    }
    Ok(canvas)
}
