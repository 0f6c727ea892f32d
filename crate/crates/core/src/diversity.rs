//! Neighbor diversity: the dispersion of cosine similarities among all (or a
//! uniform sample of) unordered pairs of a node's neighbors.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::linalg::dot;
use crate::projection::ProjectedFeatures;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DiversityStatistic {
    /// Population variance of the similarities.
    #[default]
    Variance,
    StdDev,
    Mean,
    /// Shannon entropy (nats) of an equal-width histogram over [-1, 1].
    Entropy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiversityConfig {
    pub statistic: DiversityStatistic,
    /// At most this many pairs per node; `None` enumerates every pair.
    pub sampling_budget: Option<usize>,
    pub entropy_bins: usize,
    pub master_seed: u64,
}

pub const DEFAULT_ENTROPY_BINS: usize = 10;

impl Default for DiversityConfig {
    fn default() -> Self {
        Self {
            statistic: DiversityStatistic::Variance,
            sampling_budget: None,
            entropy_bins: DEFAULT_ENTROPY_BINS,
            master_seed: 0,
        }
    }
}

impl DiversityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sampling_budget == Some(0) {
            return Err(Error::Argument("sampling budget must be at least 1".into()));
        }
        if self.entropy_bins < 2 {
            return Err(Error::Argument("entropy needs at least 2 bins".into()));
        }
        Ok(())
    }
}

/// Per-node diversity; `None` marks nodes with fewer than two neighbors.
#[derive(Debug, Clone, PartialEq)]
pub struct DiversityScores<T> {
    pub values: Vec<Option<T>>,
    pub valid_mask: Vec<bool>,
    pub pairs_evaluated: Vec<usize>,
}

/// Number of unordered pairs among `d` items.
#[inline]
pub fn pair_count(d: usize) -> usize {
    if d < 2 {
        0
    } else {
        d * (d - 1) / 2
    }
}

/// Flat index of the pair `(p, q)`, `p < q`: pairs are numbered by `q`
/// first, so `(0,1)=0, (0,2)=1, (1,2)=2, (0,3)=3, ...`.
#[inline]
pub fn pair_index(p: usize, q: usize) -> usize {
    debug_assert!(p < q);
    q * (q - 1) / 2 + p
}

/// Inverse of [`pair_index`].
#[inline]
pub fn pair_from_index(m: usize) -> (usize, usize) {
    let mut q = ((1.0 + (1.0 + 8.0 * m as f64).sqrt()) / 2.0).floor() as usize;
    while q * (q - 1) / 2 > m {
        q -= 1;
    }
    while (q + 1) * q / 2 <= m {
        q += 1;
    }
    (m - q * (q - 1) / 2, q)
}

/// Per-node random stream derived from the master seed, independent of
/// traversal order.
pub fn node_rng(master_seed: u64, node: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(master_seed ^ splitmix64(node as u64)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `min(k, C(d,2))` distinct index pairs `(p, q)`, `p < q < d`,
/// uniformly without replacement. When the budget covers every pair, all
/// pairs are returned in lexicographic order.
pub fn sample_pairs<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    if d < 2 {
        return Err(Error::Precondition(format!("degree {d} has no neighbor pairs")));
    }
    if k == 0 {
        return Err(Error::Precondition("sampling budget must be at least 1".into()));
    }
    let total = pair_count(d);
    if k >= total {
        return Ok(all_pairs(d).collect());
    }
    Ok(floyd_sample(total, k, rng).into_iter().map(pair_from_index).collect())
}

fn all_pairs(d: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..d).flat_map(move |p| ((p + 1)..d).map(move |q| (p, q)))
}

/// Floyd's algorithm: `k` distinct values from `0..total`.
fn floyd_sample<R: Rng + ?Sized>(total: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut seen = HashSet::with_capacity(k);
    let mut out = Vec::with_capacity(k);
    for j in (total - k)..total {
        let t = rng.random_range(0..=j);
        let pick = if seen.insert(t) {
            t
        } else {
            seen.insert(j);
            j
        };
        out.push(pick);
    }
    out
}

/// Cosine similarity of two unit-or-zero rows, clamped to [-1, 1].
#[inline]
pub fn pairwise_similarity<T: Scalar>(u: &[T], v: &[T]) -> T {
    dot(u, v).max(-T::one()).min(T::one())
}

/// Streaming summary of similarity values. Sums are taken around the first
/// value to limit cancellation in the variance.
#[derive(Debug, Clone)]
struct SimilarityAccumulator<T> {
    shift: T,
    count: usize,
    sum: T,
    sumsq: T,
    hist: Vec<usize>,
}

impl<T: Scalar> SimilarityAccumulator<T> {
    fn new(bins: usize) -> Self {
        Self {
            shift: T::zero(),
            count: 0,
            sum: T::zero(),
            sumsq: T::zero(),
            hist: vec![0; bins],
        }
    }

    #[inline]
    fn push(&mut self, s: T) {
        if self.count == 0 {
            self.shift = s;
        }
        let c = s - self.shift;
        self.count += 1;
        self.sum = self.sum + c;
        self.sumsq = self.sumsq + c * c;
        if !self.hist.is_empty() {
            let bins = self.hist.len();
            let pos = ((s + T::one()) / T::of(2.0) * T::of_usize(bins)).floor();
            let idx = pos.to_usize().unwrap_or(0).min(bins - 1);
            self.hist[idx] += 1;
        }
    }

    fn finish(&self, statistic: DiversityStatistic) -> T {
        debug_assert!(self.count > 0);
        let m = T::of_usize(self.count);
        let variance = || ((self.sumsq - self.sum * self.sum / m) / m).max(T::zero());
        match statistic {
            DiversityStatistic::Variance => variance(),
            DiversityStatistic::StdDev => variance().sqrt(),
            DiversityStatistic::Mean => self.shift + self.sum / m,
            DiversityStatistic::Entropy => self
                .hist
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| {
                    let p = T::of_usize(c) / m;
                    -p * p.ln()
                })
                .fold(T::zero(), |a, b| a + b),
        }
    }
}

/// Applies the configured statistic to a list of similarities.
pub fn dispersion_statistic<T: Scalar>(sims: &[T], cfg: &DiversityConfig) -> Result<T> {
    if sims.is_empty() {
        return Err(Error::Precondition("dispersion of an empty similarity list".into()));
    }
    let mut acc = accumulator(cfg);
    sims.iter().for_each(|&s| acc.push(s));
    Ok(acc.finish(cfg.statistic))
}

fn accumulator<T: Scalar>(cfg: &DiversityConfig) -> SimilarityAccumulator<T> {
    let bins = if cfg.statistic == DiversityStatistic::Entropy {
        cfg.entropy_bins
    } else {
        0
    };
    SimilarityAccumulator::new(bins)
}

/// Diversity of a single node, or `None` when it has fewer than two
/// neighbors.
pub fn neighbor_diversity<T: Scalar>(
    g: &AttributedGraph<T>,
    pf: &ProjectedFeatures<T>,
    node: usize,
    cfg: &DiversityConfig,
) -> Option<T> {
    let mut buf = Vec::new();
    node_diversity(g, pf, node, cfg, &mut buf).0
}

fn node_diversity<T: Scalar>(
    g: &AttributedGraph<T>,
    pf: &ProjectedFeatures<T>,
    node: usize,
    cfg: &DiversityConfig,
    buf: &mut Vec<T>,
) -> (Option<T>, usize) {
    let nbrs = g.neighbors(node);
    let d = nbrs.len();
    if d < 2 {
        return (None, 0);
    }
    let r = pf.directions.cols();
    buf.clear();
    for &j in nbrs {
        buf.extend_from_slice(pf.directions.row(j));
    }
    let row = |p: usize| &buf[p * r..(p + 1) * r];
    let mut acc = accumulator(cfg);
    let total = pair_count(d);
    match cfg.sampling_budget {
        Some(k) if k < total => {
            let mut rng = node_rng(cfg.master_seed, node);
            for m in floyd_sample(total, k, &mut rng) {
                let (p, q) = pair_from_index(m);
                acc.push(pairwise_similarity(row(p), row(q)));
            }
        }
        _ => {
            for p in 0..d {
                let up = row(p);
                for q in (p + 1)..d {
                    acc.push(pairwise_similarity(up, row(q)));
                }
            }
        }
    }
    (Some(acc.finish(cfg.statistic)), acc.count)
}

/// Diversity for every node. Output is identical for any worker count.
pub fn diversity_all<T: Scalar>(
    g: &AttributedGraph<T>,
    pf: &ProjectedFeatures<T>,
    cfg: &DiversityConfig,
) -> Result<DiversityScores<T>> {
    cfg.validate()?;
    if pf.node_count() != g.node_count() {
        return Err(Error::Dimension(format!(
            "{} projected rows for {} nodes",
            pf.node_count(),
            g.node_count()
        )));
    }
    let per_node: Vec<(Option<T>, usize)> = (0..g.node_count())
        .into_par_iter()
        .map_init(Vec::new, |buf, i| node_diversity(g, pf, i, cfg, buf))
        .collect();
    let (values, pairs_evaluated): (Vec<_>, Vec<_>) = per_node.into_iter().unzip();
    let valid_mask = values.iter().map(Option::is_some).collect();
    Ok(DiversityScores {
        values,
        valid_mask,
        pairs_evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn cfg(statistic: DiversityStatistic) -> DiversityConfig {
        DiversityConfig {
            statistic,
            ..Default::default()
        }
    }

    #[test]
    fn pair_counts() {
        assert_eq!(pair_count(0), 0);
        assert_eq!(pair_count(1), 0);
        assert_eq!(pair_count(2), 1);
        let looped: usize = (0..1000).map(|q| q).sum();
        assert_eq!(pair_count(1000), looped);
        assert_eq!(pair_count(1000), 499_500);
    }

    #[test]
    fn flat_index_bijection() {
        let mut m = 0;
        for q in 1..200 {
            for p in 0..q {
                assert_eq!(pair_index(p, q), m);
                assert_eq!(pair_from_index(m), (p, q));
                m += 1;
            }
        }
        let big = pair_count(3_000_000) - 1;
        assert_eq!(pair_from_index(big), (2_999_998, 2_999_999));
    }

    #[test]
    fn sample_small_degrees_returns_every_pair() {
        let mut rng = node_rng(1, 2);
        assert_eq!(sample_pairs(3, 10, &mut rng).unwrap(), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(sample_pairs(2, 5, &mut rng).unwrap(), vec![(0, 1)]);
        assert!(sample_pairs(1, 5, &mut rng).is_err());
        assert!(sample_pairs(4, 0, &mut rng).is_err());
    }

    #[test]
    fn sample_is_distinct_and_deterministic() {
        let a = sample_pairs(1000, 100, &mut node_rng(9, 3)).unwrap();
        let b = sample_pairs(1000, 100, &mut node_rng(9, 3)).unwrap();
        assert_eq!(a, b);
        let set: HashSet<_> = a.iter().collect();
        assert_eq!(set.len(), 100);
        assert!(a.iter().all(|&(p, q)| p < q && q < 1000));
    }

    #[test]
    fn similarity_examples() {
        let u = [0.6f64, 0.8];
        assert!((pairwise_similarity(&u, &u) - 1.0).abs() < 1e-15);
        assert_eq!(pairwise_similarity(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(pairwise_similarity(&[0.0, 0.0], &u), 0.0);
        assert_eq!(pairwise_similarity(&[1.0 + 1e-12, 0.0], &[1.0, 0.0]), 1.0);
    }

    #[test]
    fn statistic_examples() {
        let same = [0.3; 5];
        for s in [DiversityStatistic::Variance, DiversityStatistic::StdDev, DiversityStatistic::Entropy] {
            assert_eq!(dispersion_statistic(&same, &cfg(s)).unwrap(), 0.0);
        }
        let v = dispersion_statistic::<f64>(&[1.0, 0.0, 0.0], &cfg(DiversityStatistic::Variance)).unwrap();
        assert!((v - 2.0 / 9.0).abs() < 1e-15);
        let m = dispersion_statistic::<f64>(&[1.0, 0.0, 0.0], &cfg(DiversityStatistic::Mean)).unwrap();
        assert!((m - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(dispersion_statistic(&[0.7], &cfg(DiversityStatistic::Variance)).unwrap(), 0.0);
        assert!(dispersion_statistic::<f64>(&[], &cfg(DiversityStatistic::Variance)).is_err());
        // two equally filled bins -> ln 2; the top edge 1.0 falls in the last bin
        let e = dispersion_statistic(&[-1.0, 1.0], &cfg(DiversityStatistic::Entropy)).unwrap();
        assert!((e - 2f64.ln()).abs() < 1e-15);
    }

    fn star_with_leaves(dirs: &[[f64; 2]]) -> (AttributedGraph<f64>, ProjectedFeatures<f64>) {
        let n = dirs.len() + 1;
        let feats = Matrix::from_fn(n, 2, |i, j| if i == 0 { 1.0 } else { dirs[i - 1][j] });
        let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
        let g = AttributedGraph::build(&edges, feats.clone(), None).unwrap();
        (g, ProjectedFeatures::from_projection(feats, 0))
    }

    #[test]
    fn node_level_examples() {
        let (g, pf) = star_with_leaves(&[[2.0, 1.0], [2.0, 1.0], [2.0, 1.0]]);
        let c = DiversityConfig::default();
        assert!(neighbor_diversity(&g, &pf, 0, &c).unwrap().abs() < 1e-15);
        assert_eq!(neighbor_diversity(&g, &pf, 1, &c), None);

        // leaves e1, e1, e2: similarities {1, 0, 0}
        let (g, pf) = star_with_leaves(&[[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let v = neighbor_diversity(&g, &pf, 0, &c).unwrap();
        assert!((v - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn path_graph_defined_only_at_center() {
        let feats = Matrix::from_fn(3, 2, |i, j| if i == j { 1.0 } else { 0.5 });
        let g = AttributedGraph::build(&[(0, 1), (1, 2)], feats.clone(), None).unwrap();
        let pf = ProjectedFeatures::from_projection(feats, 0);
        let ds = diversity_all(&g, &pf, &DiversityConfig::default()).unwrap();
        assert_eq!(ds.valid_mask, vec![false, true, false]);
        assert!(ds.values[1].is_some() && ds.values[0].is_none());
        assert_eq!(ds.pairs_evaluated, vec![0, 1, 0]);
    }

    #[test]
    fn config_validation() {
        let mut c = DiversityConfig::default();
        c.sampling_budget = Some(0);
        assert!(c.validate().is_err());
        c.sampling_budget = Some(3);
        c.entropy_bins = 1;
        assert!(c.validate().is_err());
    }
}
