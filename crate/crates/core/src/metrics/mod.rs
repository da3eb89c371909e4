//! Reconstruction scoring: CER, edit similarity, exact match, n-gram match,
//! the error taxonomy, and run-level statistics.

mod edit;
mod ngram;
mod stats;
mod taxonomy;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use edit::{char_error_rate, edit_similarity, exact_match, levenshtein, Normalization};
pub use ngram::{ngram_match, KeywordWeights};
pub use stats::{summarize_runs, wilcoxon_signed_rank, WilcoxonResult, EXACT_MAX_N, MIN_PAIRS};
pub use taxonomy::{align_lines, classify_errors, prevalence, ErrorTaxonomy, Prevalence, BLOCK_MIN_LINES};

use crate::tokenizer::Tokenizer;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("ground truth is empty")]
    EmptyTruth,
    #[error("{0}")]
    EmptyInput(&'static str),
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("{n} non-zero differences, need at least {min}")]
    TooFewPairs { n: usize, min: usize },
}

/// One transcription attempt of one sample at one compression ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionRecord {
    pub sample_id: String,
    pub ground_truth: String,
    pub reconstruction: String,
    pub compression_ratio: f64,
    pub run_index: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub cer: f64,
    pub edit_similarity: f64,
    pub exact_match: bool,
    pub ngram_score: f64,
    pub taxonomy: ErrorTaxonomy,
}

/// A report tagged with the record it scores; one JSONL line of output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRecord {
    pub sample_id: String,
    pub compression_ratio: f64,
    pub run_index: u32,
    #[serde(flatten)]
    pub report: MetricReport,
}

/// Settings shared by every scored record.
#[derive(Debug, Clone)]
pub struct Scorer {
    pub tokenizer: Tokenizer,
    pub weights: KeywordWeights,
    pub max_n: usize,
    pub normalization: Normalization,
}

impl Default for Scorer {
    fn default() -> Self {
        Self {
            tokenizer: Tokenizer::Builtin,
            weights: KeywordWeights::for_language("python"),
            max_n: 4,
            normalization: Normalization::TrimTrailing,
        }
    }
}

impl Scorer {
    pub fn score(&self, truth: &str, hypothesis: &str) -> Result<MetricReport, MetricsError> {
        if truth.is_empty() {
            return Err(MetricsError::EmptyTruth);
        }
        let em = exact_match(truth, hypothesis, self.normalization);
        let (cer, es, taxonomy) = if em {
            (0.0, 100.0, ErrorTaxonomy::default())
        } else {
            (
                char_error_rate(truth, hypothesis)?,
                edit_similarity(truth, hypothesis, &self.tokenizer),
                classify_errors(truth, hypothesis, &self.tokenizer)?,
            )
        };
        Ok(MetricReport {
            cer,
            edit_similarity: es,
            exact_match: em,
            ngram_score: ngram_match(truth, hypothesis, self.max_n, &self.weights),
            taxonomy,
        })
    }

    pub fn score_record(&self, record: &ReconstructionRecord) -> Result<ScoredRecord, MetricsError> {
        Ok(ScoredRecord {
            sample_id: record.sample_id.clone(),
            compression_ratio: record.compression_ratio,
            run_index: record.run_index,
            report: self.score(&record.ground_truth, &record.reconstruction)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub cer_mean: f64,
    pub cer_std: f64,
    pub es_mean: f64,
    pub es_std: f64,
    pub em_rate: f64,
    pub ngram_mean: f64,
    pub prevalence: Prevalence,
    pub runs: usize,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricSummary {
    pub per_ratio: BTreeMap<String, RatioSummary>,
}

/// Key used for a ratio in summaries: `4`, `2.5`.
pub fn ratio_key(ratio: f64) -> String {
    format!("{ratio}")
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Aggregates scored records per ratio. CER and ES are averaged over samples
/// within each run, then summarized (mean, sample std) across runs. EM rate,
/// n-gram mean and prevalence pool every record of the ratio. The result
/// does not depend on record order.
pub fn summarize_reports(records: &[ScoredRecord]) -> Result<MetricSummary, MetricsError> {
    let mut sorted: Vec<&ScoredRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        a.compression_ratio
            .total_cmp(&b.compression_ratio)
            .then(a.run_index.cmp(&b.run_index))
            .then(a.sample_id.cmp(&b.sample_id))
            .then(a.report.cer.total_cmp(&b.report.cer))
            .then(a.report.edit_similarity.total_cmp(&b.report.edit_similarity))
            .then(a.report.ngram_score.total_cmp(&b.report.ngram_score))
    });
    let mut groups: BTreeMap<String, Vec<&ScoredRecord>> = BTreeMap::new();
    for r in sorted {
        groups.entry(ratio_key(r.compression_ratio)).or_default().push(r);
    }
    let mut per_ratio = BTreeMap::new();
    for (key, group) in groups {
        let mut runs: BTreeMap<u32, Vec<&ScoredRecord>> = BTreeMap::new();
        for r in &group {
            runs.entry(r.run_index).or_default().push(r);
        }
        let cer_runs: Vec<f64> = runs
            .values()
            .map(|rs| mean(&rs.iter().map(|r| r.report.cer).collect::<Vec<_>>()))
            .collect();
        let es_runs: Vec<f64> = runs
            .values()
            .map(|rs| mean(&rs.iter().map(|r| r.report.edit_similarity).collect::<Vec<_>>()))
            .collect();
        let (cer_mean, cer_std) = summarize_runs(&cer_runs)?;
        let (es_mean, es_std) = summarize_runs(&es_runs)?;
        let em = group.iter().filter(|r| r.report.exact_match).count();
        let taxonomies: Vec<ErrorTaxonomy> = group.iter().map(|r| r.report.taxonomy).collect();
        per_ratio.insert(
            key,
            RatioSummary {
                cer_mean,
                cer_std,
                es_mean,
                es_std,
                em_rate: 100.0 * em as f64 / group.len() as f64,
                ngram_mean: mean(&group.iter().map(|r| r.report.ngram_score).collect::<Vec<_>>()),
                prevalence: prevalence(&taxonomies)?,
                runs: runs.len(),
                records: group.len(),
            },
        );
    }
    Ok(MetricSummary { per_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scored(ratio: f64, run: u32, id: &str, cer: f64) -> ScoredRecord {
        ScoredRecord {
            sample_id: id.into(),
            compression_ratio: ratio,
            run_index: run,
            report: MetricReport {
                cer,
                edit_similarity: 100.0 - cer * 10.0,
                exact_match: cer == 0.0,
                ngram_score: 1.0 - cer,
                taxonomy: ErrorTaxonomy::from_counts((cer * 10.0) as usize, 0, 0),
            },
        }
    }

    #[test]
    fn exact_match_implies_clean_report() {
        let s = Scorer::default();
        let r = s.score("x = 1\n", "x = 1").unwrap();
        assert!(r.exact_match);
        assert_eq!((r.cer, r.edit_similarity), (0.0, 100.0));
        assert!(r.taxonomy.is_clean());
    }

    #[test]
    fn score_rejects_empty_truth() {
        assert_eq!(Scorer::default().score("", "a"), Err(MetricsError::EmptyTruth));
    }

    #[test]
    fn summary_averages_runs_then_summarizes() {
        let recs = vec![
            scored(2.0, 0, "a", 0.0),
            scored(2.0, 0, "b", 0.2),
            scored(2.0, 1, "a", 0.4),
            scored(2.0, 1, "b", 0.2),
        ];
        let s = summarize_reports(&recs).unwrap();
        let r = &s.per_ratio["2"];
        // run means 0.1 and 0.3
        assert!((r.cer_mean - 0.2).abs() < 1e-12);
        assert!((r.cer_std - (0.02f64).sqrt()).abs() < 1e-12);
        assert_eq!(r.em_rate, 25.0);
        assert_eq!(r.prevalence.token, 75.0);
        assert_eq!((r.runs, r.records), (2, 4));
    }

    #[test]
    fn summary_is_order_independent() {
        let mut recs: Vec<ScoredRecord> = (0..12)
            .map(|i| scored([1.0, 4.0][i % 2], (i / 4) as u32, &format!("s{}", i % 3), i as f64 * 0.07))
            .collect();
        let a = summarize_reports(&recs).unwrap();
        recs.reverse();
        recs.swap(1, 7);
        let b = summarize_reports(&recs).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scored_record_json_is_flat() {
        let v = serde_json::to_value(scored(4.0, 1, "x", 0.5)).unwrap();
        assert_eq!(v["sample_id"], "x");
        assert_eq!(v["cer"], 0.5);
        assert_eq!(v["taxonomy"]["token_errors"], 5);
    }
}
