use std::collections::BTreeSet;

use super::font::GlyphCache;
use super::layout::{Grid, NormalizedSource, PageLayout};
use super::{RenderConfig, RenderError, RenderStyle};
use crate::syntax::{Rgb, StyledSpan};

pub const BACKGROUND: Rgb = [255, 255, 255];
const DEFAULT_INK: Rgb = [0, 0, 0];

/// One RGB raster page, row-major, 3 bytes per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
    pub layout: PageLayout,
}

impl PageImage {
    pub fn filled(width: u32, height: u32, color: Rgb, layout: PageLayout) -> Self {
        let mut pixels = Vec::with_capacity((width * height * 3) as usize);
        for _ in 0..width * height {
            pixels.extend_from_slice(&color);
        }
        Self {
            width,
            height,
            pixels,
            layout,
        }
    }

    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        let i = ((y * self.width + x) * 3) as usize;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn non_white_pixels(&self) -> usize {
        self.pixels
            .chunks_exact(3)
            .filter(|p| *p != BACKGROUND)
            .count()
    }

    /// Bounding box `(x0, y0, x1, y1)` (inclusive) of non-background pixels.
    pub fn ink_bbox(&self) -> Option<(u32, u32, u32, u32)> {
        let mut bbox: Option<(u32, u32, u32, u32)> = None;
        for (i, p) in self.pixels.chunks_exact(3).enumerate() {
            if p == BACKGROUND {
                continue;
            }
            let (x, y) = (i as u32 % self.width, i as u32 / self.width);
            bbox = Some(match bbox {
                None => (x, y, x, y),
                Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
            });
        }
        bbox
    }

    fn blend(&mut self, x: i64, y: i64, color: Rgb, alpha: u8) {
        if alpha == 0 || x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return;
        }
        let i = ((y as u32 * self.width + x as u32) * 3) as usize;
        let a = alpha as u32;
        for (dst, &src) in self.pixels[i..i + 3].iter_mut().zip(&color) {
            *dst = ((*dst as u32 * (255 - a) + src as u32 * a + 127) / 255) as u8;
        }
    }
}

/// Diagnostic produced while rasterizing; never fatal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum RasterWarning {
    MissingGlyph { ch: char, line: usize },
    ClippedLine { line: usize },
}

impl std::fmt::Display for RasterWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RasterWarning::MissingGlyph { ch, line } => write!(
                f,
                "line {line}: no glyph for U+{:04X}, drew replacement glyph",
                *ch as u32
            ),
            RasterWarning::ClippedLine { line } => {
                write!(f, "line {line}: clipped at the right margin")
            }
        }
    }
}

/// Per-character color lookup over sorted spans.
struct ColorCursor<'a> {
    spans: &'a [StyledSpan],
    idx: usize,
}

impl<'a> ColorCursor<'a> {
    fn new(spans: &'a [StyledSpan], start: usize) -> Self {
        let idx = spans.partition_point(|s| s.char_range.end <= start);
        Self { spans, idx }
    }

    fn color(&mut self, at: usize) -> Rgb {
        while self.idx < self.spans.len() && self.spans[self.idx].char_range.end <= at {
            self.idx += 1;
        }
        match self.spans.get(self.idx) {
            Some(s) if s.char_range.contains(&at) => s.color,
            _ => DEFAULT_INK,
        }
    }
}

/// Rasterizes the lines of one page. `source` is normalized internally, so
/// span ranges refer to characters of the normalized text.
pub fn rasterize_page(
    source: &str,
    layout: &PageLayout,
    spans: &[StyledSpan],
    config: &RenderConfig,
) -> Result<(PageImage, Vec<RasterWarning>), RenderError> {
    let doc = NormalizedSource::new(source);
    rasterize_normalized(&doc, layout, spans, config)
}

pub(crate) fn rasterize_normalized(
    doc: &NormalizedSource,
    layout: &PageLayout,
    spans: &[StyledSpan],
    config: &RenderConfig,
) -> Result<(PageImage, Vec<RasterWarning>), RenderError> {
    let grid = Grid::new(config)?;
    if layout.line_range.end > doc.line_count() {
        return Err(RenderError::InvalidConfig(format!(
            "page {} covers lines up to {} but the source has {}",
            layout.page_index,
            layout.line_range.end,
            doc.line_count()
        )));
    }
    let mut image = PageImage::filled(config.base_width, config.base_height, BACKGROUND, layout.clone());
    let mut cache = GlyphCache::new(config.font_size, config.style == RenderStyle::Bold);
    let mut warnings = BTreeSet::new();
    let pitch = config.row_pitch();
    let advance = grid.metrics.advance as i64;
    let chars = doc.chars();

    let mut row = 0u32;
    for line in layout.line_range.clone() {
        let range = doc.line(line);
        let mut colors = ColorCursor::new(spans, range.start);
        let visible = if config.wrap_long_lines {
            range.clone()
        } else {
            if range.len() > grid.cols as usize {
                warnings.insert(RasterWarning::ClippedLine { line: line + 1 });
            }
            range.start..range.end.min(range.start + grid.cols as usize)
        };
        let line_rows = grid.rows_for(range.len(), config.wrap_long_lines);
        for (offset, at) in visible.enumerate() {
            let c = chars[at];
            let col = (offset % grid.cols as usize) as i64;
            let r = row + (offset / grid.cols as usize) as u32;
            if c == ' ' {
                continue;
            }
            let color = colors.color(at);
            let glyph = cache.get(c);
            if glyph.substituted {
                warnings.insert(RasterWarning::MissingGlyph { ch: c, line: line + 1 });
            }
            let pen_x = grid.margin as i64 + col * advance;
            let baseline =
                grid.margin as i64 + (r as f64 * pitch).floor() as i64 + grid.metrics.baseline as i64;
            let mask = &glyph.mask;
            for gy in 0..mask.height {
                for gx in 0..mask.width {
                    let cov = mask.coverage[(gy * mask.width + gx) as usize];
                    image.blend(
                        pen_x + mask.left as i64 + gx as i64,
                        baseline + mask.top as i64 + gy as i64,
                        color,
                        cov,
                    );
                }
            }
        }
        row += line_rows;
    }
    Ok((image, warnings.into_iter().collect()))
}
