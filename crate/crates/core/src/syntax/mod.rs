//! Token categorization and styling.
//!
//! Source text is scanned into [`TokenCategory`] runs by a small rule-based
//! lexer, then colored by a [`StyleTheme`]. All ranges are half-open
//! intervals over *character* indices (not bytes) of the normalized source.

mod bold;
mod lexer;
mod theme;

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use bold::{bold_overdraw, GlyphMask, BOLD_OFFSETS};
pub use lexer::{lex, LanguageRules, LexerRegistry, PLAIN_TEXT};
pub use theme::{apply_theme, Rgb, StyleTheme, ThemeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TokenCategory {
    Keyword,
    Identifier,
    String,
    Number,
    Comment,
    Operator,
    Punctuation,
    Whitespace,
    Default,
}

impl TokenCategory {
    pub const ALL: [TokenCategory; 9] = [
        TokenCategory::Keyword,
        TokenCategory::Identifier,
        TokenCategory::String,
        TokenCategory::Number,
        TokenCategory::Comment,
        TokenCategory::Operator,
        TokenCategory::Punctuation,
        TokenCategory::Whitespace,
        TokenCategory::Default,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TokenCategory::Keyword => "Keyword",
            TokenCategory::Identifier => "Identifier",
            TokenCategory::String => "String",
            TokenCategory::Number => "Number",
            TokenCategory::Comment => "Comment",
            TokenCategory::Operator => "Operator",
            TokenCategory::Punctuation => "Punctuation",
            TokenCategory::Whitespace => "Whitespace",
            TokenCategory::Default => "Default",
        }
    }
}

impl fmt::Display for TokenCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A categorized run of characters, before theming.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexedSpan {
    pub range: Range<usize>,
    pub category: TokenCategory,
}

/// A colored run of characters, ready for rasterization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyledSpan {
    pub char_range: Range<usize>,
    pub category: TokenCategory,
    pub color: Rgb,
}

#[derive(Debug, thiserror::Error)]
pub enum SyntaxError {
    #[error("unknown language `{0}`; use the `plain-text` fallback")]
    UnknownLanguage(String),
    #[error("invalid lexer table `{name}`: {reason}")]
    InvalidTable { name: String, reason: String },
}
