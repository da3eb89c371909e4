use crate::tokenizer::Tokenizer;

use super::MetricsError;

/// Minimum number of single-element insertions, deletions and
/// substitutions turning `a` into `b`.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Character edit distance divided by the truth length. Exceeds 1 when the
/// hypothesis adds more characters than the truth has.
pub fn char_error_rate(truth: &str, hypothesis: &str) -> Result<f64, MetricsError> {
    let t: Vec<char> = truth.chars().collect();
    if t.is_empty() {
        return Err(MetricsError::EmptyTruth);
    }
    let h: Vec<char> = hypothesis.chars().collect();
    Ok(levenshtein(&t, &h) as f64 / t.len() as f64)
}

/// `100 * (1 - d / max(|T|, |H|))` over non-whitespace tokens, 100 when both
/// sides have no tokens.
pub fn edit_similarity(truth: &str, hypothesis: &str, tokenizer: &Tokenizer) -> f64 {
    let t = tokenizer.content_tokens(truth);
    let h = tokenizer.content_tokens(hypothesis);
    let longest = t.len().max(h.len());
    if longest == 0 {
        return 100.0;
    }
    100.0 * (1.0 - levenshtein(&t, &h) as f64 / longest as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum Normalization {
    Strict,
    #[default]
    TrimTrailing,
}

fn trim_trailing(text: &str) -> String {
    let lines: Vec<&str> = text.lines().map(str::trim_end).collect();
    let mut out = lines.join("\n");
    while out.ends_with('\n') {
        out.pop();
    }
    out
}

pub fn exact_match(truth: &str, hypothesis: &str, normalization: Normalization) -> bool {
    match normalization {
        Normalization::Strict => truth == hypothesis,
        Normalization::TrimTrailing => trim_trailing(truth) == trim_trailing(hypothesis),
    }
}
