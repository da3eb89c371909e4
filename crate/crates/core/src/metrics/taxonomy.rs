//! Token / line / block error classification of a reconstruction.
//!
//! Lines are aligned by a longest common subsequence over exact line
//! matches. Between two matched anchors the unmatched truth and hypothesis
//! lines are paired in order; whichever side runs out pairs with empty
//! lines. Each pair contributes its non-whitespace token edit distance as
//! token errors. A pair is a line error when at least half of the truth
//! line's tokens differ, or, for a token-less truth line, when the
//! hypothesis line has any token. A block error is a maximal run of three
//! or more consecutive line-error pairs.

use serde::{Deserialize, Serialize};

use super::edit::levenshtein;
use super::MetricsError;
use crate::tokenizer::Tokenizer;

pub const BLOCK_MIN_LINES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ErrorTaxonomy {
    pub token_errors: usize,
    pub line_errors: usize,
    pub block_errors: usize,
    pub has_token_error: bool,
    pub has_line_error: bool,
    pub has_block_error: bool,
}

impl ErrorTaxonomy {
    pub fn from_counts(token_errors: usize, line_errors: usize, block_errors: usize) -> Self {
        Self {
            token_errors,
            line_errors,
            block_errors,
            has_token_error: token_errors > 0,
            has_line_error: line_errors > 0,
            has_block_error: block_errors > 0,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.token_errors == 0 && self.line_errors == 0 && self.block_errors == 0
    }
}

/// Index pairs of an LCS over exact line equality, in order.
fn lcs_pairs(a: &[&str], b: &[&str]) -> Vec<(usize, usize)> {
    let (n, m) = (a.len(), b.len());
    let mut table = vec![0u32; (n + 1) * (m + 1)];
    let at = |i: usize, j: usize| i * (m + 1) + j;
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[at(i, j)] = if a[i] == b[j] {
                table[at(i + 1, j + 1)] + 1
            } else {
                table[at(i + 1, j)].max(table[at(i, j + 1)])
            };
        }
    }
    let mut pairs = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if a[i] == b[j] {
            pairs.push((i, j));
            i += 1;
            j += 1;
        } else if table[at(i + 1, j)] >= table[at(i, j + 1)] {
            i += 1;
        } else {
            j += 1;
        }
    }
    pairs
}

/// Aligned `(truth_line, hypothesis_line)` pairs; `None` is an empty line.
pub fn align_lines<'a>(truth: &[&'a str], hyp: &[&'a str]) -> Vec<(Option<&'a str>, Option<&'a str>)> {
    let mut out = Vec::with_capacity(truth.len().max(hyp.len()));
    let (mut ti, mut hi) = (0, 0);
    let anchors = lcs_pairs(truth, hyp)
        .into_iter()
        .chain(std::iter::once((truth.len(), hyp.len())));
    for (ta, ha) in anchors {
        let gap = (ta - ti).max(ha - hi);
        for k in 0..gap {
            let t = (ti + k < ta).then(|| truth[ti + k]);
            let h = (hi + k < ha).then(|| hyp[hi + k]);
            out.push((t, h));
        }
        if ta < truth.len() {
            out.push((Some(truth[ta]), Some(hyp[ha])));
        }
        ti = ta + 1;
        hi = ha + 1;
    }
    out
}

pub fn classify_errors(
    truth: &str,
    hypothesis: &str,
    tokenizer: &Tokenizer,
) -> Result<ErrorTaxonomy, MetricsError> {
    if truth.is_empty() {
        return Err(MetricsError::EmptyTruth);
    }
    let truth_lines: Vec<&str> = truth.lines().collect();
    let hyp_lines: Vec<&str> = hypothesis.lines().collect();

    let mut token_errors = 0;
    let mut line_errors = 0;
    let mut block_errors = 0;
    let mut run = 0;
    for (t, h) in align_lines(&truth_lines, &hyp_lines) {
        let tt = tokenizer.content_tokens(t.unwrap_or(""));
        let ht = tokenizer.content_tokens(h.unwrap_or(""));
        let diff = levenshtein(&tt, &ht);
        token_errors += diff;
        let is_line_error = if tt.is_empty() {
            !ht.is_empty()
        } else {
            2 * diff >= tt.len()
        };
        if is_line_error {
            line_errors += 1;
            run += 1;
        } else {
            if run >= BLOCK_MIN_LINES {
                block_errors += 1;
            }
            run = 0;
        }
    }
    if run >= BLOCK_MIN_LINES {
        block_errors += 1;
    }
    Ok(ErrorTaxonomy::from_counts(token_errors, line_errors, block_errors))
}

/// Percentage of samples showing at least one error of each type.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prevalence {
    pub token: f64,
    pub line: f64,
    pub block: f64,
}

pub fn prevalence(records: &[ErrorTaxonomy]) -> Result<Prevalence, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput("prevalence needs at least one record"));
    }
    let pct = |f: fn(&ErrorTaxonomy) -> bool| {
        100.0 * records.iter().filter(|r| f(r)).count() as f64 / records.len() as f64
    };
    Ok(Prevalence {
        token: pct(|r| r.has_token_error),
        line: pct(|r| r.has_line_error),
        block: pct(|r| r.has_block_error),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOK: Tokenizer = Tokenizer::Builtin;

    #[test]
    fn identical_is_clean() {
        let src = "def f(x):\n    return x\n";
        assert!(classify_errors(src, src, &TOK).unwrap().is_clean());
    }

    #[test]
    fn typo_line_is_not_a_line_error() {
        let t = classify_errors("def foo(a, b):", "def fao(a. b):", &TOK).unwrap();
        assert_eq!(t.token_errors, 2);
        assert_eq!(t.line_errors, 0);
        assert!(t.has_token_error && !t.has_line_error);
    }

    #[test]
    fn replaced_run_is_one_block() {
        let truth: Vec<String> = (1..=10).map(|i| format!("line_{i} = {i}")).collect();
        let mut hyp = truth.clone();
        for (k, line) in hyp.iter_mut().enumerate().skip(3).take(3) {
            *line = format!("zz{k} qq{k} ww{k} ee{k}");
        }
        let t = classify_errors(&truth.join("\n"), &hyp.join("\n"), &TOK).unwrap();
        assert_eq!((t.line_errors, t.block_errors), (3, 1));
    }

    #[test]
    fn two_line_run_is_not_a_block() {
        let t = classify_errors("a\nb\nc\nd", "a\nx\ny\nd", &TOK).unwrap();
        assert_eq!((t.token_errors, t.line_errors, t.block_errors), (2, 2, 0));
    }

    #[test]
    fn missing_and_extra_lines_pair_with_empty() {
        let t = classify_errors("a\nb\nc", "a\nc", &TOK).unwrap();
        assert_eq!((t.token_errors, t.line_errors), (1, 1));
        let t = classify_errors("a\nc", "a\nb\nc", &TOK).unwrap();
        assert_eq!((t.token_errors, t.line_errors), (1, 1));
    }

    #[test]
    fn blank_truth_line_rule() {
        // A blank truth line paired with a blank hypothesis line is fine.
        let t = classify_errors("a\n\nb", "a\n   \nb", &TOK).unwrap();
        assert!(t.is_clean());
    }

    #[test]
    fn alignment_pairs_gaps_in_order() {
        let truth = ["a", "b", "c", "d"];
        let hyp = ["a", "x", "d", "e"];
        let pairs = align_lines(&truth, &hyp);
        assert_eq!(
            pairs,
            vec![
                (Some("a"), Some("a")),
                (Some("b"), Some("x")),
                (Some("c"), None),
                (Some("d"), Some("d")),
                (None, Some("e")),
            ]
        );
    }

    #[test]
    fn empty_truth_rejected() {
        assert_eq!(classify_errors("", "x", &TOK), Err(MetricsError::EmptyTruth));
    }

    #[test]
    fn prevalence_counts() {
        let clean = ErrorTaxonomy::default();
        assert_eq!(
            prevalence(&[clean; 3]).unwrap(),
            Prevalence {
                token: 0.0,
                line: 0.0,
                block: 0.0
            }
        );
        let tok = ErrorTaxonomy::from_counts(1, 0, 0);
        assert_eq!(prevalence(&[tok, clean, clean, clean]).unwrap().token, 25.0);
        let block = ErrorTaxonomy::from_counts(9, 3, 1);
        let p = prevalence(&[block, clean]).unwrap();
        assert_eq!((p.token, p.line, p.block), (50.0, 50.0, 50.0));
        assert!(prevalence(&[]).is_err());
    }
}
