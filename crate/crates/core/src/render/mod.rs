//! Raster figures written as 8-bit RGB PNG.

pub mod colormap;
mod figures;
pub mod font;

use std::io::Write;
use std::path::Path;

use crate::{Error, Result};

pub use figures::{
    comparison_panel_origin, embedding_transform, metrics_caption, render_comparison,
    render_embedding, render_heatmap, render_waveform, ComparisonInputs, PlotTransform, BLUE,
    COMPARISON_PANEL, COMPARISON_SIZE, COMPARISON_STRIP_Y, EMBEDDING_SIZE, GRAY, GREEN,
};

pub type Rgb = [u8; 3];

pub const WHITE: Rgb = [255, 255, 255];
pub const BLACK: Rgb = [0, 0, 0];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, fill: Rgb) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidConfig(format!(
                "image size {width}x{height} must be positive"
            )));
        }
        Ok(Self {
            width,
            height,
            pixels: vec![fill; width * height],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    /// Sets a pixel; out-of-bounds coordinates are ignored.
    pub fn set(&mut self, x: i64, y: i64, color: Rgb) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.pixels[y as usize * self.width + x as usize] = color;
        }
    }

    pub fn fill_rect(&mut self, x: i64, y: i64, w: usize, h: usize, color: Rgb) {
        for dy in 0..h as i64 {
            for dx in 0..w as i64 {
                self.set(x + dx, y + dy, color);
            }
        }
    }

    /// One-pixel rectangle outline.
    pub fn stroke_rect(&mut self, x: i64, y: i64, w: usize, h: usize, color: Rgb) {
        let (w, h) = (w as i64, h as i64);
        for dx in 0..w {
            self.set(x + dx, y, color);
            self.set(x + dx, y + h - 1, color);
        }
        for dy in 0..h {
            self.set(x, y + dy, color);
            self.set(x + w - 1, y + dy, color);
        }
    }

    /// Bresenham line, endpoints included.
    pub fn line(&mut self, (x0, y0): (i64, i64), (x1, y1): (i64, i64), color: Rgb) {
        let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
        let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
        let (mut x, mut y, mut err) = (x0, y0, dx + dy);
        loop {
            self.set(x, y, color);
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    /// Copies `src` with its top-left corner at `(x, y)`.
    pub fn blit(&mut self, src: &RasterImage, x: i64, y: i64) {
        for sy in 0..src.height {
            for sx in 0..src.width {
                self.set(x + sx as i64, y + sy as i64, src.get(sx, sy));
            }
        }
    }

    /// Draws `text` with the embedded font, top-left at `(x, y)`.
    pub fn text(&mut self, x: i64, y: i64, text: &str, scale: usize, color: Rgb) {
        for (i, c) in text.chars().enumerate() {
            let left = x + (i * font::ADVANCE * scale) as i64;
            for row in 0..font::GLYPH_HEIGHT {
                for col in 0..font::GLYPH_WIDTH {
                    if font::pixel(c, col, row) {
                        self.fill_rect(
                            left + (col * scale) as i64,
                            y + (row * scale) as i64,
                            scale,
                            scale,
                            color,
                        );
                    }
                }
            }
        }
    }

    /// Sub-image copy; the rectangle must lie inside the image.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<RasterImage> {
        if x + w > self.width || y + h > self.height {
            return Err(Error::InvalidConfig("crop rectangle outside image".into()));
        }
        let mut out = RasterImage::new(w, h, BLACK)?;
        for dy in 0..h {
            for dx in 0..w {
                out.pixels[dy * w + dx] = self.get(x + dx, y + dy);
            }
        }
        Ok(out)
    }

    pub fn encode_png<W: Write>(&self, out: W) -> Result<()> {
        let mut encoder = png::Encoder::new(out, self.width as u32, self.height as u32);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header()?;
        let data: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        writer.write_image_data(&data)?;
        writer.finish()?;
        Ok(())
    }

    pub fn to_png_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.encode_png(&mut out)?;
        Ok(out)
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_png_bytes()?)?;
        Ok(())
    }
}
