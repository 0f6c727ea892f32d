//! Ranking metrics. AUC averages ranks over ties; AP, P@K and the PR curve
//! break ties by ascending node id.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_K_VALUES: [usize; 4] = [100, 500, 1000, 5000];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub auc: f64,
    pub ap: f64,
    pub precision_at_k: BTreeMap<usize, f64>,
    pub ks_statistic: f64,
    pub n_evaluated: usize,
    pub n_positive: usize,
    pub config_digest: String,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub pr_points: Vec<(f64, f64)>,
}

impl EvalReport {
    /// Every metric at once; `k_values` are clamped to the number of nodes
    /// and deduplicated.
    pub fn compute<T: Scalar>(
        scores: &[T],
        labels: &[u8],
        k_values: &[usize],
        method: &str,
        config_digest: &str,
    ) -> Result<Self> {
        let auc = auc(scores, labels)?;
        let ap = average_precision(scores, labels)?;
        let ks = ks_statistic(scores, labels)?;
        let mut precision_at_k = BTreeMap::new();
        for &k in k_values {
            let k = k.clamp(1, scores.len());
            precision_at_k.insert(k, precision_at_k_of(scores, labels, k)?);
        }
        Ok(Self {
            method: method.to_string(),
            auc,
            ap,
            precision_at_k,
            ks_statistic: ks,
            n_evaluated: scores.len(),
            n_positive: labels.iter().filter(|&&l| l != 0).count(),
            config_digest: config_digest.to_string(),
            pr_points: pr_curve(scores, labels)?,
        })
    }
}

fn check<T: Scalar>(scores: &[T], labels: &[u8]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Validation("NaN score".into()));
    }
    let pos = labels.iter().filter(|&&l| l != 0).count();
    Ok((pos, labels.len() - pos))
}

fn both_classes(pos: usize, neg: usize) -> Result<()> {
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric(format!(
            "needs both classes, got {pos} positive and {neg} negative"
        )));
    }
    Ok(())
}

/// Node ids by descending score, ties by ascending id.
pub fn ranking<T: Scalar>(scores: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    idx
}

/// Mann-Whitney AUC with average ranks for tied scores.
pub fn auc<T: Scalar>(scores: &[T], labels: &[u8]) -> Result<f64> {
    let (pos, neg) = check(scores, labels)?;
    both_classes(pos, neg)?;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let avg = (i + j + 2) as f64 / 2.0;
        let tied_pos = idx[i..=j].iter().filter(|&&v| labels[v] != 0).count();
        rank_sum += avg * tied_pos as f64;
        i = j + 1;
    }
    let (p, q) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}

/// Step-interpolated average precision over the descending sweep.
pub fn average_precision<T: Scalar>(scores: &[T], labels: &[u8]) -> Result<f64> {
    let (pos, _) = check(scores, labels)?;
    if pos == 0 {
        return Err(Error::UndefinedMetric("average precision without positives".into()));
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, v) in ranking(scores).into_iter().enumerate() {
        if labels[v] != 0 {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(sum / pos as f64)
}

/// Fraction of positives among the `k` highest-ranked nodes.
pub fn precision_at_k_of<T: Scalar>(scores: &[T], labels: &[u8], k: usize) -> Result<f64> {
    check(scores, labels)?;
    if k == 0 || k > scores.len() {
        return Err(Error::Argument(format!("K = {k} outside 1..={}", scores.len())));
    }
    let hits = ranking(scores).into_iter().take(k).filter(|&v| labels[v] != 0).count();
    Ok(hits as f64 / k as f64)
}

/// Largest gap between the empirical CDFs of positive and negative scores.
pub fn ks_statistic<T: Scalar>(scores: &[T], labels: &[u8]) -> Result<f64> {
    let (pos, neg) = check(scores, labels)?;
    both_classes(pos, neg)?;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(std::cmp::Ordering::Equal));
    let (mut cp, mut cn, mut best) = (0usize, 0usize, 0.0f64);
    let mut i = 0;
    while i < idx.len() {
        let t = scores[idx[i]];
        while i < idx.len() && scores[idx[i]] == t {
            if labels[idx[i]] != 0 {
                cp += 1;
            } else {
                cn += 1;
            }
            i += 1;
        }
        best = best.max((cp as f64 / pos as f64 - cn as f64 / neg as f64).abs());
    }
    Ok(best)
}

/// `(recall, precision)` after each prefix of the ranking.
pub fn pr_curve<T: Scalar>(scores: &[T], labels: &[u8]) -> Result<Vec<(f64, f64)>> {
    let (pos, _) = check(scores, labels)?;
    if pos == 0 {
        return Err(Error::UndefinedMetric("precision-recall curve without positives".into()));
    }
    let mut hits = 0usize;
    Ok(ranking(scores)
        .into_iter()
        .enumerate()
        .map(|(rank, v)| {
            hits += (labels[v] != 0) as usize;
            (hits as f64 / pos as f64, hits as f64 / (rank + 1) as f64)
        })
        .collect())
}

/// Step-interpolated area under a list of PR points.
pub fn ap_from_points(points: &[(f64, f64)]) -> f64 {
    let mut prev = 0.0;
    points
        .iter()
        .map(|&(r, p)| {
            let a = (r - prev) * p;
            prev = r;
            a
        })
        .sum()
}
