use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::font::FontMetrics;
use super::{RenderConfig, RenderError};

/// Source text after newline and tab normalization, indexed by character.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedSource {
    chars: Vec<char>,
    lines: Vec<Range<usize>>,
}

impl NormalizedSource {
    /// CRLF and lone CR become LF; tabs become four spaces. A trailing
    /// newline does not open an extra line.
    pub fn new(source: &str) -> Self {
        let mut chars = Vec::with_capacity(source.len());
        let mut it = source.chars().peekable();
        while let Some(c) = it.next() {
            match c {
                '\r' => {
                    if it.peek() == Some(&'\n') {
                        it.next();
                    }
                    chars.push('\n');
                }
                '\t' => chars.extend([' '; 4]),
                c => chars.push(c),
            }
        }
        let mut lines = Vec::new();
        let mut start = 0;
        for (i, &c) in chars.iter().enumerate() {
            if c == '\n' {
                lines.push(start..i);
                start = i + 1;
            }
        }
        if start < chars.len() {
            lines.push(start..chars.len());
        }
        Self { chars, lines }
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn text(&self) -> String {
        self.chars.iter().collect()
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    /// Character range of line `i`, excluding its newline.
    pub fn line(&self, i: usize) -> Range<usize> {
        self.lines[i].clone()
    }

    pub fn line_len(&self, i: usize) -> usize {
        self.lines[i].len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageLayout {
    pub page_index: usize,
    /// Half-open range of 0-based source line indices.
    pub line_range: Range<usize>,
    pub rows: u32,
    /// Column capacity of one row.
    pub cols: u32,
    pub wrap_events: u32,
    pub clipped_lines: u32,
}

/// Grid geometry derived from a config and the bundled font.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub margin: u32,
    pub rows: u32,
    pub cols: u32,
    pub metrics: FontMetrics,
}

impl Grid {
    pub fn new(config: &RenderConfig) -> Result<Self, RenderError> {
        config.validate()?;
        let metrics = FontMetrics::for_size(config.font_size, config.row_pitch());
        let margin = config.margin_px();
        let cols = config.base_width.saturating_sub(2 * margin) / metrics.advance;
        if cols == 0 {
            return Err(RenderError::InvalidConfig(
                "font too large: no column fits on a page".into(),
            ));
        }
        Ok(Self {
            margin,
            rows: config.lines_per_page(),
            cols,
            metrics,
        })
    }

    /// Visual rows taken by a line of `len` characters.
    pub fn rows_for(&self, len: usize, wrap: bool) -> u32 {
        if !wrap || len == 0 {
            1
        } else {
            len.div_ceil(self.cols as usize) as u32
        }
    }
}

/// Packs source lines onto pages greedily; a line and its wrapped
/// continuation rows always stay on one page.
pub fn layout_document(source: &str, config: &RenderConfig) -> Result<Vec<PageLayout>, RenderError> {
    let doc = NormalizedSource::new(source);
    layout_normalized(&doc, config)
}

pub(crate) fn layout_normalized(
    doc: &NormalizedSource,
    config: &RenderConfig,
) -> Result<Vec<PageLayout>, RenderError> {
    let grid = Grid::new(config)?;
    let wrap = config.wrap_long_lines;
    let mut pages = Vec::new();
    let mut current = PageLayout {
        page_index: 0,
        line_range: 0..0,
        rows: 0,
        cols: grid.cols,
        wrap_events: 0,
        clipped_lines: 0,
    };
    for i in 0..doc.line_count() {
        let len = doc.line_len(i);
        let rows = grid.rows_for(len, wrap);
        if rows > grid.rows {
            return Err(RenderError::LayoutOverflow {
                line: i + 1,
                rows,
                capacity: grid.rows,
            });
        }
        if current.rows + rows > grid.rows {
            let next_index = current.page_index + 1;
            let done = std::mem::replace(
                &mut current,
                PageLayout {
                    page_index: next_index,
                    line_range: i..i,
                    rows: 0,
                    cols: grid.cols,
                    wrap_events: 0,
                    clipped_lines: 0,
                },
            );
            pages.push(done);
        }
        current.line_range.end = i + 1;
        current.rows += rows;
        if rows > 1 {
            current.wrap_events += 1;
        }
        if !wrap && len > grid.cols as usize {
            current.clipped_lines += 1;
        }
    }
    pages.push(current);
    Ok(pages)
}
