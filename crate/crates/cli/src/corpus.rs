//! Local corpus discovery: walk a directory, keep source files whose line
//! count falls inside the filter, and count their text tokens.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use codepix_core::syntax::{LexerRegistry, PLAIN_TEXT};
use codepix_core::{Tokenizer, TokenizerSpec};
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("no source files under {root} with {min_lines}..={max_lines} lines")]
    Empty {
        root: PathBuf,
        min_lines: usize,
        max_lines: usize,
    },
    #[error("cannot read corpus root {0}: {1}")]
    Root(PathBuf, std::io::Error),
    #[error("invalid line filter: min {0} > max {1}")]
    Filter(usize, usize),
    #[error(transparent)]
    Tokenizer(#[from] codepix_core::tokenizer::TokenizerError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub path: PathBuf,
    pub language: String,
    pub line_count: usize,
    pub text_tokens: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineFilter {
    pub min_lines: usize,
    pub max_lines: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedFile {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub entries: Vec<CorpusEntry>,
    pub filters_applied: LineFilter,
    pub tokenizer: TokenizerSpec,
    /// Files with a known extension that could not be read as UTF-8 text.
    pub skipped: Vec<SkippedFile>,
}

/// Language of `path` from its extension, unless `language_override` is set.
/// Unknown extensions map to plain text.
pub fn detect_language(path: &Path, language_override: Option<&str>) -> String {
    if let Some(lang) = language_override {
        return lang.to_string();
    }
    path.extension()
        .and_then(|e| e.to_str())
        .and_then(|e| LexerRegistry::builtin().language_for_extension(e))
        .unwrap_or(PLAIN_TEXT)
        .to_string()
}

/// Lines as counted by the filter: `str::lines`, so a trailing newline does
/// not add an empty line.
pub fn line_count(text: &str) -> usize {
    text.lines().count()
}

/// Source files under `root` with a recognised extension, following symlinks
/// and keeping one path per canonical file. Sorted by path.
pub fn discover_sources(root: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    std::fs::metadata(root).map_err(|e| CorpusError::Root(root.to_path_buf(), e))?;
    let registry = LexerRegistry::builtin();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let walker = WalkDir::new(root).follow_links(true).sort_by_file_name();
    for entry in walker.into_iter().filter_map(Result::ok) {
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.path();
        let known = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| registry.language_for_extension(e).is_some());
        if !known {
            continue;
        }
        let canonical = std::fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf());
        if seen.insert(canonical) {
            out.push(path.to_path_buf());
        }
    }
    out.sort();
    Ok(out)
}

pub fn ingest_corpus(
    root: &Path,
    min_lines: usize,
    max_lines: usize,
    tokenizer: &TokenizerSpec,
    language_override: Option<&str>,
) -> Result<CorpusManifest, CorpusError> {
    if min_lines > max_lines {
        return Err(CorpusError::Filter(min_lines, max_lines));
    }
    let tok: Tokenizer = tokenizer.load()?;
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for path in discover_sources(root)? {
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => {
                skipped.push(SkippedFile {
                    path,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let lines = line_count(&text);
        if !(min_lines..=max_lines).contains(&lines) {
            continue;
        }
        entries.push(CorpusEntry {
            language: detect_language(&path, language_override),
            line_count: lines,
            text_tokens: tok.count(&text),
            path,
        });
    }
    if entries.is_empty() {
        return Err(CorpusError::Empty {
            root: root.to_path_buf(),
            min_lines,
            max_lines,
        });
    }
    Ok(CorpusManifest {
        entries,
        filters_applied: LineFilter { min_lines, max_lines },
        tokenizer: tokenizer.clone(),
        skipped,
    })
}
