//! Text tokenization used for budgets and token-level metrics.
//!
//! The builtin rule set (`builtin-v1`) splits text into maximal runs:
//!
//! * a whitespace run is one token;
//! * an identifier starts with a letter or `_` and continues with letters,
//!   digits or `_`;
//! * a number starts with an ASCII digit and continues with letters, digits,
//!   `_`, or a `.` that is followed by a digit;
//! * every other character is a token on its own.
//!
//! `def f(x):` therefore yields `def`, ` `, `f`, `(`, `x`, `)`, `:`.
//!
//! An external vocabulary (one token per line, UTF-8) switches to greedy
//! longest-match segmentation; characters not covered by any entry become
//! single-character tokens.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub const BUILTIN_RULE_VERSION: &str = "builtin-v1";

#[derive(Debug, thiserror::Error)]
pub enum TokenizerError {
    #[error("tokenizer vocabulary {path}: {source}")]
    Vocab {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("tokenizer config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TokenizerKind {
    #[default]
    Builtin,
    ExternalVocab,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerSpec {
    pub kind: TokenizerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocab_source: Option<PathBuf>,
    pub rule_version: String,
}

impl Default for TokenizerSpec {
    fn default() -> Self {
        Self::builtin()
    }
}

impl TokenizerSpec {
    pub fn builtin() -> Self {
        Self {
            kind: TokenizerKind::Builtin,
            vocab_source: None,
            rule_version: BUILTIN_RULE_VERSION.to_string(),
        }
    }

    pub fn external(path: impl Into<PathBuf>) -> Self {
        Self {
            kind: TokenizerKind::ExternalVocab,
            vocab_source: Some(path.into()),
            rule_version: "vocab-greedy-v1".to_string(),
        }
    }

    pub fn load(&self) -> Result<Tokenizer, TokenizerError> {
        match self.kind {
            TokenizerKind::Builtin => Ok(Tokenizer::Builtin),
            TokenizerKind::ExternalVocab => {
                let path = self.vocab_source.as_deref().ok_or_else(|| {
                    TokenizerError::Config("external vocabulary needs a vocab_source".into())
                })?;
                Tokenizer::from_vocab_file(path)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenClass {
    Word,
    Number,
    Whitespace,
    Symbol,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub class: TokenClass,
}

#[derive(Debug, Clone)]
pub enum Tokenizer {
    Builtin,
    Vocab {
        entries: HashSet<String>,
        max_chars: usize,
    },
}

impl Tokenizer {
    pub fn from_vocab_file(path: &Path) -> Result<Self, TokenizerError> {
        let text = std::fs::read_to_string(path).map_err(|source| TokenizerError::Vocab {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::from_vocab(text.lines().map(str::to_string)))
    }

    pub fn from_vocab(entries: impl IntoIterator<Item = String>) -> Self {
        let entries: HashSet<String> = entries.into_iter().filter(|e| !e.is_empty()).collect();
        let max_chars = entries.iter().map(|e| e.chars().count()).max().unwrap_or(1);
        Tokenizer::Vocab { entries, max_chars }
    }

    pub fn tokenize<'a>(&self, text: &'a str) -> Vec<Token<'a>> {
        match self {
            Tokenizer::Builtin => builtin_tokens(text),
            Tokenizer::Vocab { entries, max_chars } => vocab_tokens(text, entries, *max_chars),
        }
    }

    /// Tokens excluding whitespace runs.
    pub fn content_tokens<'a>(&self, text: &'a str) -> Vec<&'a str> {
        self.tokenize(text)
            .into_iter()
            .filter(|t| t.class != TokenClass::Whitespace)
            .map(|t| t.text)
            .collect()
    }

    pub fn count(&self, text: &str) -> usize {
        self.tokenize(text).len()
    }
}

fn classify(text: &str) -> TokenClass {
    let first = text.chars().next().unwrap_or(' ');
    if text.chars().all(char::is_whitespace) {
        TokenClass::Whitespace
    } else if first.is_ascii_digit() {
        TokenClass::Number
    } else if first.is_alphabetic() || first == '_' {
        TokenClass::Word
    } else {
        TokenClass::Symbol
    }
}

fn builtin_tokens(text: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some((start, c)) = it.next() {
        let class = if c.is_whitespace() {
            while it.peek().is_some_and(|(_, n)| n.is_whitespace()) {
                it.next();
            }
            TokenClass::Whitespace
        } else if c.is_ascii_digit() {
            loop {
                match it.peek() {
                    Some(&(_, n)) if n.is_alphanumeric() || n == '_' => {
                        it.next();
                    }
                    Some(&(i, '.')) if text[i + 1..].starts_with(|d: char| d.is_ascii_digit()) => {
                        it.next();
                    }
                    _ => break,
                }
            }
            TokenClass::Number
        } else if c.is_alphabetic() || c == '_' {
            while it
                .peek()
                .is_some_and(|(_, n)| n.is_alphanumeric() || *n == '_')
            {
                it.next();
            }
            TokenClass::Word
        } else {
            TokenClass::Symbol
        };
        let end = it.peek().map_or(text.len(), |(i, _)| *i);
        out.push(Token {
            text: &text[start..end],
            class,
        });
    }
    out
}

fn vocab_tokens<'a>(text: &'a str, entries: &HashSet<String>, max_chars: usize) -> Vec<Token<'a>> {
    let bounds: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let n = bounds.len() - 1;
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let longest = (1..=max_chars.min(n - i))
            .rev()
            .find(|&len| entries.contains(&text[bounds[i]..bounds[i + len]]))
            .unwrap_or(1);
        let piece = &text[bounds[i]..bounds[i + longest]];
        out.push(Token {
            text: piece,
            class: classify(piece),
        });
        i += longest;
    }
    out
}

/// Number of text tokens under `spec`. Zero exactly when `source` is empty.
pub fn count_text_tokens(source: &str, spec: &TokenizerSpec) -> Result<usize, TokenizerError> {
    Ok(spec.load()?.count(source))
}
