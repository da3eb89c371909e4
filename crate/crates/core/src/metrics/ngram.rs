//! BLEU-style n-gram match plus a keyword-weighted unigram variant.

use std::collections::HashMap;

use crate::syntax::LexerRegistry;
use crate::tokenizer::Tokenizer;

/// Per-token unigram weights; tokens absent from `weights` get `default_weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct KeywordWeights {
    pub weights: HashMap<String, f64>,
    pub default_weight: f64,
}

impl KeywordWeights {
    pub fn uniform() -> Self {
        Self {
            weights: HashMap::new(),
            default_weight: 1.0,
        }
    }

    /// Keywords of `language` weigh 1.0, everything else 0.2.
    pub fn for_language(language: &str) -> Self {
        let weights = LexerRegistry::builtin()
            .rules(language)
            .map(|r| r.keywords.iter().map(|k| (k.clone(), 1.0)).collect())
            .unwrap_or_default();
        Self {
            weights,
            default_weight: 0.2,
        }
    }

    fn weight(&self, token: &str) -> f64 {
        self.weights.get(token).copied().unwrap_or(self.default_weight)
    }
}

fn ngram_counts<'t, 'a>(tokens: &'t [&'a str], n: usize) -> HashMap<&'t [&'a str], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

fn clipped_precision(reference: &[&str], hypothesis: &[&str], n: usize) -> f64 {
    let total = hypothesis.len().saturating_sub(n - 1);
    if hypothesis.len() < n || total == 0 {
        return 0.0;
    }
    let refs = ngram_counts(reference, n);
    let hyps = ngram_counts(hypothesis, n);
    let matched: usize = hyps
        .iter()
        .map(|(g, c)| (*c).min(refs.get(g).copied().unwrap_or(0)))
        .sum();
    matched as f64 / total as f64
}

fn weighted_unigram_precision(reference: &[&str], hypothesis: &[&str], weights: &KeywordWeights) -> f64 {
    let mut refs: HashMap<&str, usize> = HashMap::new();
    for t in reference {
        *refs.entry(t).or_insert(0) += 1;
    }
    let mut hyps: HashMap<&str, usize> = HashMap::new();
    for t in hypothesis {
        *hyps.entry(t).or_insert(0) += 1;
    }
    let mut keys: Vec<&&str> = hyps.keys().collect();
    keys.sort();
    let (mut num, mut den) = (0.0, 0.0);
    for t in keys {
        let c = hyps[*t];
        let w = weights.weight(t);
        num += w * c.min(refs.get(*t).copied().unwrap_or(0)) as f64;
        den += w * c as f64;
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn combine(precisions: &[f64], brevity: f64) -> f64 {
    if precisions.iter().any(|&p| p <= 0.0) {
        return 0.0;
    }
    let log_mean = precisions.iter().map(|p| p.ln()).sum::<f64>() / precisions.len() as f64;
    (brevity * log_mean.exp()).clamp(0.0, 1.0)
}

/// Mean of plain BLEU and keyword-weighted BLEU over non-whitespace tokens.
///
/// Orders above the reference length are dropped, so short identical
/// inputs still score 1. The weighted variant reweights unigram matches
/// only; higher orders are shared with plain BLEU. No smoothing: any zero
/// precision gives 0.
pub fn ngram_match(truth: &str, hypothesis: &str, max_n: usize, weights: &KeywordWeights) -> f64 {
    let max_n = max_n.max(1);
    let tok = Tokenizer::Builtin;
    let reference = tok.content_tokens(truth);
    let hyp = tok.content_tokens(hypothesis);
    match (reference.is_empty(), hyp.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let orders = max_n.min(reference.len());
    let brevity = if hyp.len() >= reference.len() {
        1.0
    } else {
        (1.0 - reference.len() as f64 / hyp.len() as f64).exp()
    };
    let plain: Vec<f64> = (1..=orders)
        .map(|n| clipped_precision(&reference, &hyp, n))
        .collect();
    let mut weighted = plain.clone();
    weighted[0] = weighted_unigram_precision(&reference, &hyp, weights);
    0.5 * combine(&plain, brevity) + 0.5 * combine(&weighted, brevity)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_one() {
        let w = KeywordWeights::uniform();
        assert_eq!(ngram_match("def f(x): return x", "def f(x): return x", 4, &w), 1.0);
        assert_eq!(ngram_match("x", "x", 4, &w), 1.0);
    }

    #[test]
    fn no_overlap_is_zero() {
        assert_eq!(ngram_match("a b c", "x y z", 4, &KeywordWeights::uniform()), 0.0);
    }

    #[test]
    fn hand_computed_bigram_fixture() {
        // p1 = 3/4, p2 = 2/3, BP = 1, score = sqrt(p1 * p2) = sqrt(0.5).
        let got = ngram_match("a b c d", "a b c e", 2, &KeywordWeights::uniform());
        assert!((got - 0.5f64.sqrt()).abs() < 1e-15, "{got}");
    }

    #[test]
    fn brevity_penalty_applies() {
        // Hypothesis is a 2-token prefix of a 4-token reference at max_n = 1:
        // p1 = 1, BP = exp(1 - 4/2).
        let got = ngram_match("a b c d", "a b", 1, &KeywordWeights::uniform());
        assert!((got - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn keyword_weights_change_weighted_half() {
        // Matching "def" but missing identifiers: keyword-weighted precision is higher.
        let w = KeywordWeights::for_language("python");
        let plain = ngram_match("def foo", "def bar", 1, &KeywordWeights::uniform());
        let weighted = ngram_match("def foo", "def bar", 1, &w);
        assert!((plain - 0.5).abs() < 1e-15);
        // weighted unigram precision = 1.0 / (1.0 + 0.2)
        let expected = 0.5 * 0.5 + 0.5 * (1.0 / 1.2);
        assert!((weighted - expected).abs() < 1e-15, "{weighted}");
    }
}
