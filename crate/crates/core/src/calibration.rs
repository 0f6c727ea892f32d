//! Graph-level calibration of a raw per-node statistic: absolute deviation
//! from a global reference, z-scoring over the valid set, a fallback for
//! nodes where the statistic is undefined, and an optional mean + λ·std
//! threshold.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Standard deviations below this are treated as zero.
pub const DEGENERATE_SIGMA: f64 = 1e-15;
pub const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    #[default]
    Median,
    Mean,
}

/// Treatment of nodes outside the valid set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    /// Score 0, the mean of the standardized valid scores.
    #[default]
    Zero,
    /// Median of the standardized valid scores.
    MedianOfValid,
    /// Excluded from evaluation.
    ValidOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub reference: Reference,
    pub fallback: Fallback,
    /// `None` disables binary predictions.
    pub threshold_lambda: Option<f64>,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            reference: Reference::Median,
            fallback: Fallback::Zero,
            threshold_lambda: Some(DEFAULT_LAMBDA),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnomalyScores<T> {
    /// One score per node. Nodes excluded under [`Fallback::ValidOnly`] hold 0
    /// and are flagged in `evaluated_mask`.
    pub scores: Vec<T>,
    pub predictions: Option<Vec<u8>>,
    pub reference_value: T,
    pub mu_delta: T,
    pub sigma_delta: T,
    pub tau: Option<T>,
    pub evaluated_mask: Vec<bool>,
}

impl<T: Scalar> AnomalyScores<T> {
    /// Scores of evaluated nodes, in node order.
    pub fn evaluated_scores(&self) -> Vec<T> {
        self.scores
            .iter()
            .zip(&self.evaluated_mask)
            .filter(|(_, &m)| m)
            .map(|(&s, _)| s)
            .collect()
    }

    /// `labels` restricted to evaluated nodes.
    pub fn evaluated_labels(&self, labels: &[u8]) -> Vec<u8> {
        labels
            .iter()
            .zip(&self.evaluated_mask)
            .filter(|(_, &m)| m)
            .map(|(&l, _)| l)
            .collect()
    }
}

pub(crate) fn sorted<T: Scalar>(values: impl Iterator<Item = T>) -> Vec<T> {
    let mut v: Vec<T> = values.collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    v
}

/// Median with the even-count midpoint rule. `values` must be non-empty.
pub fn median<T: Scalar>(values: impl Iterator<Item = T>) -> T {
    let v = sorted(values);
    let m = v.len();
    assert!(m > 0, "median of empty set");
    if m % 2 == 1 {
        v[m / 2]
    } else {
        (v[m / 2 - 1] + v[m / 2]) / T::of(2.0)
    }
}

/// Population mean and standard deviation (two-pass).
pub fn mean_std<T: Scalar>(values: &[T]) -> (T, T) {
    let m = T::of_usize(values.len());
    let mean = values.iter().copied().sum::<T>() / m;
    let var = values.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / m;
    (mean, var.sqrt())
}

/// Median or mean of the defined values.
pub fn global_reference<T: Scalar>(values: &[Option<T>], mode: Reference) -> Result<T> {
    let valid: Vec<T> = values.iter().flatten().copied().collect();
    if valid.is_empty() {
        return Err(Error::DegenerateGraph("no valid nodes to calibrate against".into()));
    }
    Ok(match mode {
        Reference::Median => median(valid.into_iter()),
        Reference::Mean => mean_std(&valid).0,
    })
}

/// `|D_i - reference|` for every defined value.
pub fn deviations<T: Scalar>(values: &[Option<T>], reference: T) -> Vec<Option<T>> {
    values.iter().map(|v| v.map(|x| (x - reference).abs())).collect()
}

/// Z-scores of the defined deviations; returns `(scores, mu, sigma)`. A
/// degenerate sigma yields all-zero scores.
pub fn standardize<T: Scalar>(deltas: &[Option<T>]) -> (Vec<Option<T>>, T, T) {
    let valid: Vec<T> = deltas.iter().flatten().copied().collect();
    if valid.is_empty() {
        return (deltas.to_vec(), T::zero(), T::zero());
    }
    let (mu, sigma) = mean_std(&valid);
    let degenerate = sigma < T::of(DEGENERATE_SIGMA);
    let scores = deltas
        .iter()
        .map(|d| d.map(|x| if degenerate { T::zero() } else { (x - mu) / sigma }))
        .collect();
    (scores, mu, sigma)
}

/// Fills scores for undefined nodes per `policy`; returns
/// `(scores, evaluated_mask)`.
pub fn apply_fallback<T: Scalar>(valid_scores: &[Option<T>], policy: Fallback) -> (Vec<T>, Vec<bool>) {
    let fill = match policy {
        Fallback::Zero | Fallback::ValidOnly => T::zero(),
        Fallback::MedianOfValid => {
            if valid_scores.iter().any(Option::is_some) {
                median(valid_scores.iter().flatten().copied())
            } else {
                T::zero()
            }
        }
    };
    let scores = valid_scores.iter().map(|s| s.unwrap_or(fill)).collect();
    let mask = match policy {
        Fallback::ValidOnly => valid_scores.iter().map(Option::is_some).collect(),
        _ => vec![true; valid_scores.len()],
    };
    (scores, mask)
}

/// `tau = mean + lambda * std` over the evaluated scores; a node is flagged
/// when its score is strictly above `tau`. Unevaluated nodes are never
/// flagged.
pub fn binary_threshold<T: Scalar>(scores: &[T], mask: &[bool], lambda: T) -> (Vec<u8>, T) {
    let evaluated: Vec<T> = scores.iter().zip(mask).filter(|(_, &m)| m).map(|(&s, _)| s).collect();
    if evaluated.is_empty() {
        return (vec![0; scores.len()], T::zero());
    }
    let (mu, sigma) = mean_std(&evaluated);
    let sigma = if sigma < T::of(DEGENERATE_SIGMA) { T::zero() } else { sigma };
    let tau = mu + lambda * sigma;
    let preds = scores
        .iter()
        .zip(mask)
        .map(|(&s, &m)| u8::from(m && s > tau))
        .collect();
    (preds, tau)
}

/// The full calibration chain applied to a raw statistic (`None` = outside
/// the valid set).
pub fn calibrate<T: Scalar>(raw: &[Option<T>], cfg: &CalibrationConfig) -> Result<AnomalyScores<T>> {
    let reference_value = global_reference(raw, cfg.reference)?;
    let (standardized, mu_delta, sigma_delta) = standardize(&deviations(raw, reference_value));
    let (scores, evaluated_mask) = apply_fallback(&standardized, cfg.fallback);
    let (predictions, tau) = match cfg.threshold_lambda {
        Some(lambda) => {
            let (p, t) = binary_threshold(&scores, &evaluated_mask, T::of(lambda));
            (Some(p), Some(t))
        }
        None => (None, None),
    };
    Ok(AnomalyScores {
        scores,
        predictions,
        reference_value,
        mu_delta,
        sigma_delta,
        tau,
        evaluated_mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn some(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().copied().map(Some).collect()
    }

    #[test]
    fn reference_examples() {
        assert_eq!(global_reference(&some(&[3.0, 1.0, 2.0]), Reference::Median).unwrap(), 2.0);
        assert_eq!(global_reference(&some(&[1.0, 2.0, 3.0, 4.0]), Reference::Median).unwrap(), 2.5);
        let m = global_reference(&some(&[1.0, 2.0, 100.0]), Reference::Mean).unwrap();
        assert!((m - 103.0 / 3.0).abs() < 1e-12);
        let mixed = vec![None, Some(5.0), None, Some(1.0)];
        assert_eq!(global_reference(&mixed, Reference::Median).unwrap(), 3.0);
        assert!(matches!(
            global_reference::<f64>(&[None, None], Reference::Median),
            Err(Error::DegenerateGraph(_))
        ));
    }

    #[test]
    fn deviation_examples() {
        assert_eq!(deviations(&some(&[0.3]), 0.3), vec![Some(0.0)]);
        let d = deviations(&some(&[0.1, 0.5]), 0.3);
        assert!((d[0].unwrap() - 0.2).abs() < 1e-15 && (d[1].unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(deviations(&[None, Some(1.0)], 0.0), vec![None, Some(1.0)]);
    }

    #[test]
    fn standardize_examples() {
        let (s, mu, sigma) = standardize(&some(&[0.4, 0.4, 0.4]));
        assert_eq!(s, some(&[0.0, 0.0, 0.0]));
        assert!((mu - 0.4).abs() < 1e-15 && sigma < 1e-15);
        let (s, mu, sigma) = standardize(&some(&[0.0, 2.0]));
        assert_eq!((mu, sigma), (1.0, 1.0));
        assert_eq!(s, some(&[-1.0, 1.0]));
    }

    #[test]
    fn fallback_examples() {
        let valid = vec![Some(-1.0), None, Some(1.0)];
        let (s, m) = apply_fallback(&valid, Fallback::Zero);
        assert_eq!((s, m), (vec![-1.0, 0.0, 1.0], vec![true; 3]));

        let valid = vec![Some(-1.0), Some(0.0), None, Some(5.0)];
        let (s, _) = apply_fallback(&valid, Fallback::MedianOfValid);
        assert_eq!(s[2], 0.0);
        let valid = vec![Some(-1.0), Some(3.0), None];
        assert_eq!(apply_fallback(&valid, Fallback::MedianOfValid).0[2], 1.0);

        let (_, m) = apply_fallback(&valid, Fallback::ValidOnly);
        assert_eq!(m, vec![true, true, false]);
    }

    #[test]
    fn threshold_examples() {
        let (p, tau) = binary_threshold(&[0.0, 0.0, 3.0], &[true; 3], 1.0);
        assert!((tau - (1.0 + 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(p, vec![0, 0, 1]);

        let (p, tau) = binary_threshold(&[0.5; 4], &[true; 4], 1.0);
        assert_eq!((p, tau), (vec![0; 4], 0.5));

        let s = [1.0, 2.0, 3.0, 10.0];
        let (p, tau) = binary_threshold(&s, &[true; 4], 0.0);
        assert_eq!(tau, 4.0);
        assert_eq!(p, vec![0, 0, 0, 1]);

        let (p, _) = binary_threshold(&[0.0, 9.0], &[true, false], 0.0);
        assert_eq!(p, vec![0, 0]);
    }

    #[test]
    fn calibrate_zero_fallback_invariants() {
        let raw = vec![Some(0.1f64), None, Some(0.4), Some(0.2), Some(0.9), None];
        let a = calibrate(&raw, &CalibrationConfig::default()).unwrap();
        assert!((a.reference_value - 0.3).abs() < 1e-15);
        assert_eq!(a.scores[1], 0.0);
        assert_eq!(a.scores[5], 0.0);
        let valid: Vec<f64> = [0, 2, 3, 4].iter().map(|&i| a.scores[i]).collect();
        let (m, s) = mean_std(&valid);
        assert!(m.abs() < 1e-12 && (s - 1.0).abs() < 1e-12);
        let tau = a.tau.unwrap();
        for (s, p) in a.scores.iter().zip(a.predictions.as_ref().unwrap()) {
            assert_eq!(*p == 1, *s > tau);
        }
    }

    #[test]
    fn calibrate_without_threshold() {
        let cfg = CalibrationConfig {
            threshold_lambda: None,
            ..Default::default()
        };
        let a = calibrate(&some(&[1.0, 2.0, 4.0]), &cfg).unwrap();
        assert!(a.predictions.is_none() && a.tau.is_none());
    }
}
