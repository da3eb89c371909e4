use statrs::distribution::{ContinuousCDF, Normal};

use super::MetricsError;

/// Largest sample size evaluated with the exact null distribution.
pub const EXACT_MAX_N: usize = 25;
pub const MIN_PAIRS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonResult {
    /// `min(W+, W-)` over midranks of |a - b|.
    pub statistic: f64,
    pub p_value: f64,
    /// Pairs left after dropping zero differences.
    pub n: usize,
    pub exact: bool,
}

/// Midranks of `values` (1-based), doubled so every rank is an integer.
pub(crate) fn doubled_midranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0u64; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Ranks i+1..=j+1 share the midrank (i + j + 2) / 2.
        for &k in &order[i..=j] {
            ranks[k] = (i + j + 2) as u64;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are dropped. With at most 25 remaining pairs the p-value
/// comes from the exact null distribution of the rank sum (ties handled by
/// midranks); beyond that a normal approximation with tie correction and no
/// continuity correction is used.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch(a.len(), b.len()));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Err(MetricsError::Degenerate("all paired differences are zero"));
    }
    let n = diffs.len();
    if n < MIN_PAIRS {
        return Err(MetricsError::TooFewPairs { n, min: MIN_PAIRS });
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = doubled_midranks(&abs);
    let total: u64 = ranks.iter().sum();
    let plus: u64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let stat2 = plus.min(total - plus);
    let statistic = stat2 as f64 / 2.0;

    if n <= EXACT_MAX_N {
        // counts[s] = number of sign assignments whose doubled W+ equals s.
        let mut counts = vec![0u64; total as usize + 1];
        counts[0] = 1;
        let mut reach = 0usize;
        for &r in &ranks {
            let r = r as usize;
            for s in (0..=reach).rev() {
                if counts[s] != 0 {
                    counts[s + r] += counts[s];
                }
            }
            reach += r;
        }
        let tail: u64 = counts[..=stat2 as usize].iter().sum();
        let p = 2.0 * tail as f64 / (1u64 << n) as f64;
        return Ok(WilcoxonResult {
            statistic,
            p_value: p.min(1.0),
            n,
            exact: true,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut sorted = abs.clone();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let z = (statistic - mean) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p = 2.0 * normal.cdf(z);
    Ok(WilcoxonResult {
        statistic,
        p_value: p.min(1.0),
        n,
        exact: false,
    })
}

/// Mean and sample standard deviation (n - 1 denominator, 0 for one value).
pub fn summarize_runs(values: &[f64]) -> Result<(f64, f64), MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput("summarize_runs needs at least one value"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 2^n enumeration over sign assignments of the same doubled ranks.
    fn enumerate_p(a: &[f64], b: &[f64]) -> f64 {
        let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
        let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
        let ranks = doubled_midranks(&abs);
        let total: u64 = ranks.iter().sum();
        let plus: u64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
        let t = plus.min(total - plus);
        let n = diffs.len();
        let hits = (0u64..1 << n)
            .filter(|mask| {
                let s: u64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
                s <= t
            })
            .count();
        (2.0 * hits as f64 / (1u64 << n) as f64).min(1.0)
    }

    #[test]
    fn constant_shift_n8() {
        let a: Vec<f64> = (0..8).map(|i| i as f64 * 1.5).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 2.0).collect();
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 0.0078125);
        assert!(r.exact);
    }

    #[test]
    fn fixed_n6_matches_enumeration() {
        let a = [1.83, 0.50, 1.62, 2.48, 1.68, 1.88];
        let b = [0.878, 0.647, 0.598, 2.05, 1.06, 1.29];
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        // Differences: +0.952, -0.147, +1.022, +0.43, +0.62, +0.59 -> W- = 1.
        assert_eq!(r.statistic, 1.0);
        assert_eq!(r.p_value, enumerate_p(&a, &b));
        assert_eq!(r.p_value, 0.0625);
    }

    #[test]
    fn identical_samples_are_degenerate() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(matches!(
            wilcoxon_signed_rank(&a, &a),
            Err(MetricsError::Degenerate(_))
        ));
    }

    #[test]
    fn too_few_and_mismatched() {
        assert!(matches!(
            wilcoxon_signed_rank(&[1.0, 2.0], &[2.0, 3.0]),
            Err(MetricsError::TooFewPairs { .. })
        ));
        assert!(matches!(
            wilcoxon_signed_rank(&[1.0], &[2.0, 3.0]),
            Err(MetricsError::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn large_sample_uses_normal_approximation() {
        let a: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..40).map(|i| i as f64 + if i % 3 == 0 { -0.5 } else { 0.7 }).collect();
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert!(!r.exact);
        assert!(r.p_value > 0.0 && r.p_value < 0.05, "{r:?}");
    }

    #[test]
    fn summaries() {
        assert_eq!(summarize_runs(&[5.0; 5]).unwrap(), (5.0, 0.0));
        let (m, s) = summarize_runs(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(m, 3.0);
        assert!((s - 2.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(summarize_runs(&[7.0]).unwrap(), (7.0, 0.0));
        assert!(summarize_runs(&[]).is_err());
    }

    #[test]
    fn midranks_with_ties() {
        assert_eq!(doubled_midranks(&[3.0, 1.0, 3.0, 2.0]), vec![7, 2, 7, 4]);
    }
}
