//! Ranking quality metrics and reporting statistics.
//!
//! Relevance labels are integer grades `0..=4`. Positions are 1-based in
//! the usual DCG discount `gain / log2(position + 1)`.

use serde::{Deserialize, Serialize};

use crate::dataset::QueryGroup;
use crate::{Error, Result};

/// Maps a relevance grade (or a real-valued score) to a DCG gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainFn {
    /// `2^label - 1`: strongly favors the top grades.
    Exponential,
    /// `label` as-is.
    Linear,
}

impl GainFn {
    /// Gain of an integer relevance grade.
    pub fn label_gain(self, label: u8) -> f64 {
        match self {
            GainFn::Exponential => ((1u64 << label) - 1) as f64,
            GainFn::Linear => f64::from(label),
        }
    }

    /// Gain of a real-valued score, clamped below at zero so that model
    /// scores can stand in for grades.
    pub fn score_gain(self, score: f64) -> f64 {
        let s = score.max(0.0);
        match self {
            GainFn::Exponential => s.exp2() - 1.0,
            GainFn::Linear => s,
        }
    }
}

impl std::fmt::Display for GainFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GainFn::Exponential => "exponential",
            GainFn::Linear => "linear",
        })
    }
}

impl std::str::FromStr for GainFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" => Ok(GainFn::Exponential),
            "linear" => Ok(GainFn::Linear),
            other => Err(Error::InvalidConfig(format!(
                "unknown gain function `{other}` (expected `exponential` or `linear`)"
            ))),
        }
    }
}

/// Discounted cumulative gain over the first `k` positions of an already
/// ranked label list. Lists shorter than `k` contribute their full length.
///
/// ```
/// use alrank::metrics::{dcg_at_k, GainFn};
/// let dcg = dcg_at_k(&[4, 3, 2, 1], 4, GainFn::Exponential);
/// assert!((dcg - 21.3472).abs() < 1e-4);
/// ```
pub fn dcg_at_k(ranked_labels: &[u8], k: usize, gain: GainFn) -> f64 {
    assert!(k >= 1, "dcg_at_k requires k >= 1");
    ranked_labels
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &label)| gain.label_gain(label) / (i as f64 + 2.0).log2())
        .sum()
}

/// DCG of the ideal ordering (labels sorted descending) at cutoff `k`.
pub fn best_dcg_at_k(labels: &[u8], k: usize, gain: GainFn) -> f64 {
    assert!(k >= 1, "best_dcg_at_k requires k >= 1");
    let mut sorted = labels.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    dcg_at_k(&sorted, k, gain)
}

/// Fraction of the top `k` positions occupied by low grades (label 0 or 1).
///
/// The denominator stays `k` even when the list is shorter, so truncated
/// lists cannot look artificially bad.
pub fn r01_at_k(ranked_labels: &[u8], k: usize) -> f64 {
    assert!(k >= 1, "r01_at_k requires k >= 1");
    let low = ranked_labels
        .iter()
        .take(k)
        .filter(|&&label| label <= 1)
        .count();
    low as f64 / k as f64
}

/// Document order induced by scores: indices sorted by descending score,
/// ties broken by ascending index so ranking is deterministic.
pub fn rank_by_scores(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Pearson correlation coefficient, centered two-pass form.
///
/// Errors on length mismatch, fewer than two points, or a constant input
/// (where the statistic is undefined).
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "pearson inputs have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::ShapeMismatch(format!(
            "pearson needs at least 2 points, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx == 0.0 {
        return Err(Error::ConstantInput("first pearson input"));
    }
    if vy == 0.0 {
        return Err(Error::ConstantInput("second pearson input"));
    }
    Ok((cov / (vx * vy).sqrt()).clamp(-1.0, 1.0))
}

/// Histogram of selected queries per bucket (buckets are `0..=9`).
pub fn bucket_distribution<'a, I>(selected: I) -> [u64; 10]
where
    I: IntoIterator<Item = &'a QueryGroup>,
{
    let mut hist = [0u64; 10];
    for group in selected {
        hist[group.bucket as usize] += 1;
    }
    hist
}

/// Per-bucket label histogram over the documents of selected queries.
/// `table[bucket][label]` counts documents.
pub fn label_distribution<'a, I>(selected: I) -> [[u64; 5]; 10]
where
    I: IntoIterator<Item = &'a QueryGroup>,
{
    let mut table = [[0u64; 5]; 10];
    for group in selected {
        for doc in &group.docs {
            table[group.bucket as usize][doc.label as usize] += 1;
        }
    }
    table
}

/// Quality summary of one ranked list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Cutoff used for all three statistics.
    pub k: usize,
    /// DCG of the ranking as given.
    pub dcg: f64,
    /// DCG of the ideal reordering of the same labels.
    pub best_dcg: f64,
    /// Share of low-grade documents in the top `k`.
    pub r01: f64,
}

/// Evaluates an already ranked label list at cutoff `k`.
pub fn evaluate_ranking(ranked_labels: &[u8], k: usize, gain: GainFn) -> EvalReport {
    EvalReport {
        k,
        dcg: dcg_at_k(ranked_labels, k, gain),
        best_dcg: best_dcg_at_k(ranked_labels, k, gain),
        r01: r01_at_k(ranked_labels, k),
    }
}
