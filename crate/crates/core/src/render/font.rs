//! Bundled monospace font and glyph coverage rasterization.
//!
//! Only the bundled DejaVu Sans Mono is ever used; system fonts are not
//! consulted. Coverage comes from `ab_glyph`'s outline rasterizer and is
//! quantized as `floor(clamp(c, 0, 1) * 255 + 0.5)`. Glyphs are always
//! rasterized at integral pen positions, so a glyph's mask depends only on
//! the character and the font size.

use std::collections::HashMap;
use std::sync::OnceLock;

use ab_glyph::{point, Font, FontRef, GlyphId, PxScale};

use crate::syntax::GlyphMask;

static FONT_BYTES: &[u8] = include_bytes!("../../assets/fonts/DejaVuSansMono.ttf");

pub const FONT_NAME: &str = "DejaVu Sans Mono";

const REPLACEMENT_CHARS: [char; 2] = ['\u{FFFD}', '?'];

pub(crate) fn bundled_font() -> &'static FontRef<'static> {
    static FONT: OnceLock<FontRef<'static>> = OnceLock::new();
    FONT.get_or_init(|| FontRef::try_from_slice(FONT_BYTES).expect("bundled font parses"))
}

/// Per-size metrics in whole pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FontMetrics {
    pub advance: u32,
    /// Distance from a row's top edge to the baseline.
    pub baseline: i32,
}

impl FontMetrics {
    pub fn for_size(font_size: u32, row_pitch: f64) -> Self {
        let font = bundled_font();
        let upem = font.units_per_em().unwrap_or(2048.0) as f64;
        let em = font_size as f64 / upem;
        let advance = font.h_advance_unscaled(font.glyph_id('M')) as f64 * em;
        let ascent = font.ascent_unscaled() as f64 * em;
        let descent = font.descent_unscaled() as f64 * em;
        // Center the ascent..descent box vertically inside the row.
        let baseline = (row_pitch - (ascent - descent)) / 2.0 + ascent;
        Self {
            advance: (advance.round() as u32).max(1),
            baseline: baseline.round() as i32,
        }
    }
}

fn px_scale(font_size: u32) -> PxScale {
    let font = bundled_font();
    let upem = font.units_per_em().unwrap_or(2048.0);
    PxScale::from(font_size as f32 * font.height_unscaled() / upem)
}

fn quantize(c: f32) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

/// Rasterized glyph plus whether it had to be substituted.
#[derive(Debug, Clone)]
pub struct RasterGlyph {
    pub mask: GlyphMask,
    pub substituted: bool,
}

/// Glyph id for `c`, falling back to the replacement glyph when the font
/// has no mapping. Returns `(id, substituted)`.
pub fn resolve_glyph(c: char) -> (GlyphId, bool) {
    let font = bundled_font();
    let id = font.glyph_id(c);
    if id.0 != 0 {
        return (id, false);
    }
    for r in REPLACEMENT_CHARS {
        let rid = font.glyph_id(r);
        if rid.0 != 0 {
            return (rid, true);
        }
    }
    (id, true)
}

pub fn rasterize_glyph(c: char, font_size: u32) -> RasterGlyph {
    let font = bundled_font();
    let (id, substituted) = if c.is_whitespace() {
        (font.glyph_id(' '), false)
    } else {
        resolve_glyph(c)
    };
    let glyph = id.with_scale_and_position(px_scale(font_size), point(0.0, 0.0));
    let mask = match font.outline_glyph(glyph) {
        Some(outlined) => {
            let bounds = outlined.px_bounds();
            let width = (bounds.max.x - bounds.min.x) as u32;
            let height = (bounds.max.y - bounds.min.y) as u32;
            let mut mask = GlyphMask::new(bounds.min.x as i32, bounds.min.y as i32, width, height);
            outlined.draw(|x, y, c| {
                if x < width && y < height {
                    mask.coverage[(y * width + x) as usize] = quantize(c);
                }
            });
            mask
        }
        None => GlyphMask::default(),
    };
    RasterGlyph { mask, substituted }
}

/// Memoizes glyph masks for one font size and weight.
#[derive(Debug)]
pub struct GlyphCache {
    font_size: u32,
    bold: bool,
    glyphs: HashMap<char, RasterGlyph>,
}

impl GlyphCache {
    pub fn new(font_size: u32, bold: bool) -> Self {
        Self {
            font_size,
            bold,
            glyphs: HashMap::new(),
        }
    }

    pub fn get(&mut self, c: char) -> &RasterGlyph {
        let (font_size, bold) = (self.font_size, self.bold);
        self.glyphs.entry(c).or_insert_with(|| {
            let mut glyph = rasterize_glyph(c, font_size);
            if bold {
                glyph.mask = crate::syntax::bold_overdraw(&glyph.mask, &crate::syntax::BOLD_OFFSETS);
            }
            glyph
        })
    }
}
