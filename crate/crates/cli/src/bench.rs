use std::path::PathBuf;
use std::time::Instant;

use codepix_core::{encode_png, render_document, RenderConfig, Tokenizer};
use serde::{Deserialize, Serialize};

use crate::corpus::detect_language;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub files: usize,
    pub pages: usize,
    pub text_tokens: u64,
    pub seconds: f64,
    pub tokens_per_second: f64,
}

/// Times rendering plus PNG encoding of every file. Reading and token
/// counting happen before the clock starts.
pub fn bench_render(
    files: &[PathBuf],
    config: &RenderConfig,
    tokenizer: &Tokenizer,
    language_override: Option<&str>,
) -> anyhow::Result<BenchReport> {
    let mut sources = Vec::with_capacity(files.len());
    let mut text_tokens = 0u64;
    for f in files {
        let text = std::fs::read_to_string(f)?;
        text_tokens += tokenizer.count(&text) as u64;
        sources.push((detect_language(f, language_override), text));
    }
    let start = Instant::now();
    let mut pages = 0;
    for (lang, text) in &sources {
        let doc = render_document(text, config, lang)?;
        for p in &doc.pages {
            std::hint::black_box(encode_png(p)?);
        }
        pages += doc.pages.len();
    }
    let seconds = start.elapsed().as_secs_f64();
    Ok(BenchReport {
        files: files.len(),
        pages,
        text_tokens,
        seconds,
        tokens_per_second: if seconds > 0.0 { text_tokens as f64 / seconds } else { f64::INFINITY },
    })
}
