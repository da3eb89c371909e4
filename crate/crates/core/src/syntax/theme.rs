use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{LexedSpan, StyledSpan, TokenCategory};

pub type Rgb = [u8; 3];

#[derive(Debug, thiserror::Error)]
pub enum ThemeError {
    #[error("theme parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("theme `{theme}`: {category} color equals the background")]
    InvisibleForeground { theme: String, category: TokenCategory },
}

/// Category-to-color mapping. Categories missing from the map use
/// `default_foreground`; whitespace is always painted with the background.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyleTheme {
    pub name: String,
    pub background: Rgb,
    #[serde(default)]
    pub default_foreground: Rgb,
    #[serde(default)]
    pub categories: BTreeMap<TokenCategory, Rgb>,
}

impl StyleTheme {
    pub fn from_json(text: &str) -> Result<Self, ThemeError> {
        let theme: StyleTheme = serde_json::from_str(text)?;
        theme.validate()?;
        Ok(theme)
    }

    /// The bundled light theme.
    pub fn default_light() -> Self {
        Self::from_json(include_str!("../../assets/theme-default-light.json"))
            .expect("bundled theme is valid")
    }

    /// Black on white for every category.
    pub fn plain() -> Self {
        Self {
            name: "plain".into(),
            background: [255, 255, 255],
            default_foreground: [0, 0, 0],
            categories: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<(), ThemeError> {
        for category in TokenCategory::ALL {
            if category == TokenCategory::Whitespace {
                continue;
            }
            if self.color(category) == self.background {
                return Err(ThemeError::InvisibleForeground {
                    theme: self.name.clone(),
                    category,
                });
            }
        }
        Ok(())
    }

    pub fn color(&self, category: TokenCategory) -> Rgb {
        if category == TokenCategory::Whitespace {
            return self.background;
        }
        self.categories
            .get(&category)
            .copied()
            .unwrap_or(self.default_foreground)
    }
}

/// Colors lexed spans, filling any gaps (up to the last span end) with
/// `Default` spans so the output tiles `0..end` without holes.
pub fn apply_theme(spans: &[LexedSpan], theme: &StyleTheme) -> Vec<StyledSpan> {
    let mut out = Vec::with_capacity(spans.len());
    let mut cursor = 0;
    for span in spans {
        if span.range.start > cursor {
            out.push(StyledSpan {
                char_range: cursor..span.range.start,
                category: TokenCategory::Default,
                color: theme.color(TokenCategory::Default),
            });
        }
        if span.range.is_empty() {
            continue;
        }
        let start = span.range.start.max(cursor);
        if start < span.range.end {
            out.push(StyledSpan {
                char_range: start..span.range.end,
                category: span.category,
                color: theme.color(span.category),
            });
            cursor = span.range.end;
        }
    }
    out
}
