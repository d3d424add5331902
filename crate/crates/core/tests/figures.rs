mod common;

use soundplot::audio::AudioBuffer;
use soundplot::embedding::PairedEmbedding;
use soundplot::metrics::QualityMetrics;
use soundplot::render::{
    comparison_panel_origin, embedding_transform, metrics_caption, render_comparison,
    render_embedding, ComparisonInputs, RasterImage, BLUE, COMPARISON_PANEL, COMPARISON_SIZE,
    COMPARISON_STRIP_Y, EMBEDDING_SIZE, GRAY, GREEN, WHITE,
};
use soundplot::spectral::{build_mel_filterbank, magnitude, mel_spectrogram, stft, StftConfig};

#[test]
fn golden_images_match() {
    let bad = common::check_goldens();
    assert!(bad.is_empty(), "renders differ from tests/golden: {bad:?}");
}

#[test]
fn renders_are_deterministic() {
    let a = common::golden_renders();
    let b = common::golden_renders();
    for ((name, x), (_, y)) in a.iter().zip(&b) {
        assert_eq!(
            x.to_png_bytes().unwrap(),
            y.to_png_bytes().unwrap(),
            "{name}"
        );
    }
}

fn comparison_of(a: &AudioBuffer, b: &AudioBuffer, metrics: &QualityMetrics) -> RasterImage {
    let cfg = StftConfig::default();
    let fb = build_mel_filterbank(128, 1025, common::SR, 0.0, 11_025.0).unwrap();
    let sa = magnitude(&stft(a, &cfg).unwrap());
    let sb = magnitude(&stft(b, &cfg).unwrap());
    let ma = mel_spectrogram(&sa, &fb).unwrap();
    let mb = mel_spectrogram(&sb, &fb).unwrap();
    render_comparison(&ComparisonInputs {
        original: a,
        synthesized: b,
        original_spectrum: &sa,
        synthesized_spectrum: &sb,
        original_mel: &ma,
        synthesized_mel: &mb,
        metrics,
    })
    .unwrap()
}

fn metrics(snr: f64) -> QualityMetrics {
    QualityMetrics {
        snr_db: snr,
        waveform_corr: 0.01,
        spectral_corr: 0.5,
        mel_corr: 0.9,
        aligned_length: 0,
    }
}

#[test]
fn comparison_layout() {
    let x = common::sine(880.0, 0.5, 0.7);
    let img = comparison_of(&x, &x, &metrics(2.5));
    assert_eq!((img.width(), img.height()), COMPARISON_SIZE);
    let (w, h) = COMPARISON_PANEL;
    for row in 0..3 {
        let (lx, ly) = comparison_panel_origin(row, 0);
        let (rx, ry) = comparison_panel_origin(row, 1);
        assert_eq!(ly, ry);
        assert_eq!(rx, lx + w + 10);
        assert_eq!(
            img.crop(lx, ly, w, h).unwrap(),
            img.crop(rx, ry, w, h).unwrap(),
            "row {row}"
        );
    }
    assert!(COMPARISON_STRIP_Y + 20 < COMPARISON_SIZE.1);
}

#[test]
fn metrics_strip_shows_rounded_snr() {
    assert!(metrics_caption(&metrics(-0.814)).contains("-0.81"));
    assert!(
        metrics_caption(&metrics(12.345)).contains("12.35")
            || metrics_caption(&metrics(12.345)).contains("12.34")
    );
    let x = common::sine(880.0, 0.3, 0.7);
    let a = comparison_of(&x, &x, &metrics(-0.814));
    let b = comparison_of(&x, &x, &metrics(-0.824));
    let strip = |img: &RasterImage| {
        img.crop(
            0,
            COMPARISON_STRIP_Y,
            COMPARISON_SIZE.0,
            COMPARISON_SIZE.1 - COMPARISON_STRIP_Y,
        )
        .unwrap()
    };
    // Only the strip differs, and it matches a fresh rendering of the caption.
    assert_ne!(strip(&a), strip(&b));
    let mut expect = RasterImage::new(
        COMPARISON_SIZE.0,
        COMPARISON_SIZE.1 - COMPARISON_STRIP_Y,
        WHITE,
    )
    .unwrap();
    expect.text(10, 10, &metrics_caption(&metrics(-0.814)), 2, [0, 0, 0]);
    assert_eq!(strip(&a), expect);
}

fn count(img: &RasterImage, color: [u8; 3]) -> usize {
    (0..img.height())
        .flat_map(|y| (0..img.width()).map(move |x| (x, y)))
        .filter(|&(x, y)| img.get(x, y) == color)
        .count()
}

#[test]
fn identical_point_sets_draw_no_visible_segments() {
    let pts: Vec<[f64; 2]> = (0..20).map(|i| [i as f64, ((i * 7) % 11) as f64]).collect();
    let emb = PairedEmbedding {
        original_points: pts.clone(),
        synthesized_points: pts,
        pairs: (0..20).map(|i| (i, i)).collect(),
    };
    let img = render_embedding(&emb).unwrap();
    assert_eq!((img.width(), img.height()), EMBEDDING_SIZE);
    assert_eq!(count(&img, GRAY), 0);
    assert!(count(&img, GREEN) > 0 && count(&img, BLUE) > 0);
}

#[test]
fn segment_endpoints_follow_the_affine_map() {
    let emb = PairedEmbedding {
        original_points: vec![[0.0, 0.0], [10.0, 4.0]],
        synthesized_points: vec![[2.0, 1.0], [10.0, 4.0]],
        pairs: vec![(0, 0)],
    };
    let img = render_embedding(&emb).unwrap();
    let t = embedding_transform(&emb, 2).unwrap();
    // Bounding box [0,10]x[0,4] plus 5%.
    assert!((t.u_range.0 + 0.5).abs() < 1e-12 && (t.u_range.1 - 10.5).abs() < 1e-12);
    assert!((t.v_range.0 + 0.2).abs() < 1e-12 && (t.v_range.1 - 4.2).abs() < 1e-12);
    // Independent recomputation of the map for the synthesized endpoint.
    let (x0, y0) = (t.origin.0 as f64, t.origin.1 as f64);
    let (w, h) = ((t.size.0 - 1) as f64, (t.size.1 - 1) as f64);
    let px = (x0 + (2.0 + 0.5) / 11.0 * w).round() as i64;
    let py = (y0 + (4.2 - 1.0) / 4.4 * h).round() as i64;
    assert_eq!(t.to_pixel([2.0, 1.0]), (px, py));
    // Gray runs between the two markers; the midpoint is gray.
    let (ax, ay) = t.to_pixel([0.0, 0.0]);
    let (mx, my) = ((ax + px) / 2, (ay + py) / 2);
    assert_eq!(img.get(mx as usize, my as usize), GRAY);
    assert_eq!(img.get(px as usize, py as usize), GREEN);
    assert_eq!(img.get(ax as usize, ay as usize), BLUE);
    // The first two panels carry no segments.
    assert_eq!(count(&img.crop(0, 0, 1200, 600).unwrap(), GRAY), 0);
}
