//! Page layout and deterministic rasterization of source text.

mod config;
pub mod font;
mod layout;
mod png_codec;
mod raster;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{RenderConfig, RenderStyle, SUPPORTED_PATCH_SIZES};
pub use layout::{layout_document, Grid, NormalizedSource, PageLayout};
pub use png_codec::{decode_png, encode_png};
pub use raster::{rasterize_page, PageImage, RasterWarning, BACKGROUND};

use crate::syntax::{apply_theme, LexerRegistry, StyleTheme, PLAIN_TEXT};

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("invalid render config: {0}")]
    InvalidConfig(String),
    #[error("line {line} needs {rows} rows but a page holds {capacity}")]
    LayoutOverflow { line: usize, rows: u32, capacity: u32 },
    #[error("png: {0}")]
    Png(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestPage {
    pub index: usize,
    pub line_start: usize,
    pub line_end: usize,
    pub width: u32,
    pub height: u32,
    pub wrap_events: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderManifest {
    pub pages: Vec<ManifestPage>,
    pub style: RenderStyle,
    pub font_size: u32,
    pub language: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RenderedDocument {
    pub pages: Vec<PageImage>,
    pub manifest: RenderManifest,
}

/// Renders with the bundled lexers and the theme implied by `config.style`.
pub fn render_document(
    source: &str,
    config: &RenderConfig,
    language: &str,
) -> Result<RenderedDocument, RenderError> {
    let theme = match config.style {
        RenderStyle::Highlight => StyleTheme::default_light(),
        RenderStyle::Plain | RenderStyle::Bold => StyleTheme::plain(),
    };
    render_document_with(source, config, language, &theme, LexerRegistry::builtin())
}

pub fn render_document_with(
    source: &str,
    config: &RenderConfig,
    language: &str,
    theme: &StyleTheme,
    registry: &LexerRegistry,
) -> Result<RenderedDocument, RenderError> {
    let doc = NormalizedSource::new(source);
    let layouts = layout::layout_normalized(&doc, config)?;
    let mut warnings = Vec::new();

    let resolved = match registry.resolve(language) {
        Some(lang) => lang.to_string(),
        None => {
            warnings.push(format!(
                "unknown language `{language}`, rendered as {PLAIN_TEXT}"
            ));
            PLAIN_TEXT.to_string()
        }
    };
    let text = doc.text();
    let lexed = registry
        .lex(&text, &resolved)
        .expect("resolved language always lexes");
    let spans = apply_theme(&lexed, theme);

    let rendered: Vec<(PageImage, Vec<RasterWarning>)> = layouts
        .par_iter()
        .map(|page| raster::rasterize_normalized(&doc, page, &spans, config))
        .collect::<Result<_, _>>()?;

    let mut pages = Vec::with_capacity(rendered.len());
    for (image, page_warnings) in rendered {
        warnings.extend(page_warnings.iter().map(ToString::to_string));
        pages.push(image);
    }
    let manifest = RenderManifest {
        pages: pages
            .iter()
            .map(|p| ManifestPage {
                index: p.layout.page_index,
                line_start: p.layout.line_range.start,
                line_end: p.layout.line_range.end,
                width: p.width,
                height: p.height,
                wrap_events: p.layout.wrap_events,
            })
            .collect(),
        style: config.style,
        font_size: config.font_size,
        language: resolved,
        warnings,
    };
    Ok(RenderedDocument { pages, manifest })
}
