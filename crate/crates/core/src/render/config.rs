use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RenderError;

/// Patch sizes every base resolution must divide evenly.
pub const SUPPORTED_PATCH_SIZES: [u32; 2] = [14, 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderStyle {
    #[default]
    Plain,
    Bold,
    Highlight,
}

impl RenderStyle {
    pub fn as_str(self) -> &'static str {
        match self {
            RenderStyle::Plain => "plain",
            RenderStyle::Bold => "bold",
            RenderStyle::Highlight => "highlight",
        }
    }
}

impl fmt::Display for RenderStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RenderStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "plain" => Ok(RenderStyle::Plain),
            "bold" => Ok(RenderStyle::Bold),
            "highlight" => Ok(RenderStyle::Highlight),
            other => Err(format!("unknown style `{other}` (plain, bold, highlight)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub base_width: u32,
    pub base_height: u32,
    pub font_size: u32,
    pub line_height_multiplier: f64,
    /// Fraction of the page width used as margin on every side.
    pub margin_fraction: f64,
    pub style: RenderStyle,
    pub wrap_long_lines: bool,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            base_width: 2240,
            base_height: 2240,
            font_size: 40,
            line_height_multiplier: 1.0,
            margin_fraction: 0.01,
            style: RenderStyle::Plain,
            wrap_long_lines: true,
        }
    }
}

impl RenderConfig {
    pub fn with_style(mut self, style: RenderStyle) -> Self {
        self.style = style;
        self
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        let invalid = |msg: String| Err(RenderError::InvalidConfig(msg));
        if self.base_width == 0 || self.base_height == 0 {
            return invalid("base dimensions must be positive".into());
        }
        for p in SUPPORTED_PATCH_SIZES {
            if !self.base_width.is_multiple_of(p) || !self.base_height.is_multiple_of(p) {
                return invalid(format!(
                    "base {}x{} is not divisible by patch size {p}",
                    self.base_width, self.base_height
                ));
            }
        }
        if self.font_size == 0 {
            return invalid("font_size must be positive".into());
        }
        if !(self.line_height_multiplier.is_finite() && self.line_height_multiplier > 0.0) {
            return invalid("line_height_multiplier must be positive".into());
        }
        if !(0.0..0.5).contains(&self.margin_fraction) {
            return invalid("margin_fraction must lie in [0, 0.5)".into());
        }
        if self.lines_per_page() == 0 {
            return invalid("font too large: no text row fits on a page".into());
        }
        Ok(())
    }

    /// Margin in pixels, applied to all four sides.
    pub fn margin_px(&self) -> u32 {
        (self.margin_fraction * self.base_width as f64).round() as u32
    }

    pub fn row_pitch(&self) -> f64 {
        self.font_size as f64 * self.line_height_multiplier
    }

    pub fn lines_per_page(&self) -> u32 {
        let usable = self.base_height.saturating_sub(2 * self.margin_px()) as f64;
        (usable / self.row_pitch()).floor() as u32
    }
}
