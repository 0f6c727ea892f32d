//! Structure and attribute heuristics scored through the same calibration
//! chain as neighbor diversity: local clustering coefficient (LCC),
//! neighborhood residual (NRS), propagation consistency decay (PCD) and an
//! ego-network attributed-normality score (AMEN-Ego).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{calibrate, AnomalyScores, CalibrationConfig};
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::linalg::{dot, norm2, Matrix};
use crate::projection::{ProjectedFeatures, ZERO_ROW_EPS};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heuristic {
    Lcc,
    Nrs,
    Pcd,
    AmenEgo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcdConfig {
    pub hops: usize,
    pub weights: Vec<f64>,
}

impl Default for PcdConfig {
    fn default() -> Self {
        Self {
            hops: 3,
            weights: vec![1.0, 0.7, 0.5],
        }
    }
}

impl PcdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.hops {
            return Err(Error::Argument(format!(
                "{} PCD weights for {} hops",
                self.weights.len(),
                self.hops
            )));
        }
        if self.weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Argument("PCD weights must be positive".into()));
        }
        Ok(())
    }
}

/// Raw per-node heuristic values with the method's own valid set.
#[derive(Debug, Clone, PartialEq)]
pub struct RawHeuristicScores<T> {
    pub values: Vec<T>,
    pub valid_mask: Vec<bool>,
}

impl<T: Scalar> RawHeuristicScores<T> {
    fn new(g: &AttributedGraph<T>, values: Vec<T>, min_degree: usize) -> Self {
        let valid_mask = (0..g.node_count()).map(|i| g.degree(i) >= min_degree).collect();
        Self { values, valid_mask }
    }

    /// Values with entries outside the valid set replaced by `None`.
    pub fn masked(&self) -> Vec<Option<T>> {
        self.values
            .iter()
            .zip(&self.valid_mask)
            .map(|(&v, &m)| m.then_some(v))
            .collect()
    }
}

pub fn heuristic_scores<T: Scalar>(
    g: &AttributedGraph<T>,
    pf: &ProjectedFeatures<T>,
    kind: Heuristic,
    pcd: &PcdConfig,
) -> Result<RawHeuristicScores<T>> {
    Ok(match kind {
        Heuristic::Lcc => lcc_scores(g),
        Heuristic::Nrs => nrs_scores(g, pf),
        Heuristic::Pcd => pcd_scores(g, pf, pcd)?,
        Heuristic::AmenEgo => amen_ego_scores(g, pf),
    })
}

/// Feeds raw heuristic values through the shared calibration chain.
pub fn calibrate_heuristic<T: Scalar>(
    raw: &RawHeuristicScores<T>,
    cfg: &CalibrationConfig,
) -> Result<AnomalyScores<T>> {
    calibrate(&raw.masked(), cfg)
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Number of edges among the neighbors of `i`.
pub fn triangles_at<T: Scalar>(g: &AttributedGraph<T>, i: usize) -> usize {
    let ni = g.neighbors(i);
    ni.iter().map(|&p| sorted_intersection_len(ni, g.neighbors(p))).sum::<usize>() / 2
}

/// `2 T_i / (d_i (d_i - 1))`; valid for degree >= 2 (0 elsewhere).
pub fn lcc_scores<T: Scalar>(g: &AttributedGraph<T>) -> RawHeuristicScores<T> {
    let values = (0..g.node_count())
        .into_par_iter()
        .map(|i| {
            let d = g.degree(i);
            if d < 2 {
                return T::zero();
            }
            T::of_usize(2 * triangles_at(g, i)) / T::of_usize(d * (d - 1))
        })
        .collect();
    RawHeuristicScores::new(g, values, 2)
}

/// One step of `D^{-1/2} A D^{-1/2}` propagation with degrees clamped at 1.
pub fn propagate<T: Scalar>(g: &AttributedGraph<T>, h: &Matrix<T>) -> Matrix<T> {
    let inv_sqrt: Vec<T> = (0..g.node_count())
        .map(|i| T::one() / T::of_usize(g.degree(i).max(1)).sqrt())
        .collect();
    let cols = h.cols();
    let rows: Vec<Vec<T>> = (0..g.node_count())
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![T::zero(); cols];
            for &j in g.neighbors(i) {
                let w = inv_sqrt[i] * inv_sqrt[j];
                for (a, &x) in acc.iter_mut().zip(h.row(j)) {
                    *a = *a + w * x;
                }
            }
            acc
        })
        .collect();
    Matrix::from_rows(&rows).unwrap_or_else(|_| Matrix::zeros(0, cols))
}

/// `|| x_i - (Â X)_i ||_2` on the l1-normalized projection; valid for
/// degree >= 1.
pub fn nrs_scores<T: Scalar>(g: &AttributedGraph<T>, pf: &ProjectedFeatures<T>) -> RawHeuristicScores<T> {
    let x = &pf.normalized;
    let agg = propagate(g, x);
    let values = (0..g.node_count())
        .map(|i| {
            x.row(i)
                .iter()
                .zip(agg.row(i))
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<T>()
                .sqrt()
        })
        .collect();
    RawHeuristicScores::new(g, values, 1)
}

/// Cosine with the convention that any zero vector gives 0.
fn cosine<T: Scalar>(a: &[T], b: &[T]) -> T {
    let (na, nb) = (norm2(a), norm2(b));
    let eps = T::of(ZERO_ROW_EPS);
    if na < eps || nb < eps {
        return T::zero();
    }
    (dot(a, b) / (na * nb)).max(-T::one()).min(T::one())
}

/// `sum_l w_l (1 - cos(h_i^(l-1), h_i^(l)))` with `h^(0)` the l1-normalized
/// projection; valid for degree >= 1.
pub fn pcd_scores<T: Scalar>(
    g: &AttributedGraph<T>,
    pf: &ProjectedFeatures<T>,
    cfg: &PcdConfig,
) -> Result<RawHeuristicScores<T>> {
    cfg.validate()?;
    let n = g.node_count();
    let mut values = vec![T::zero(); n];
    let mut prev = pf.normalized.clone();
    for &w in &cfg.weights {
        let next = propagate(g, &prev);
        let w = T::of(w);
        for (i, v) in values.iter_mut().enumerate() {
            *v = *v + w * (T::one() - cosine(prev.row(i), next.row(i)));
        }
        prev = next;
    }
    Ok(RawHeuristicScores::new(g, values, 1))
}

/// Per-dimension min-max rescale to [0, 1]; constant columns become 0.
pub fn minmax_rescale<T: Scalar>(x: &Matrix<T>) -> Matrix<T> {
    let (n, d) = x.shape();
    let mut lo = vec![T::infinity(); d];
    let mut hi = vec![T::neg_infinity(); d];
    for row in x.iter_rows() {
        for f in 0..d {
            lo[f] = lo[f].min(row[f]);
            hi[f] = hi[f].max(row[f]);
        }
    }
    Matrix::from_fn(n, d, |i, f| {
        let span = hi[f] - lo[f];
        if span > T::zero() {
            (x.get(i, f) - lo[f]) / span
        } else {
            T::zero()
        }
    })
}

/// Size-normalized internal and external contribution vectors of the ego
/// network of `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct EgoContributions<T> {
    pub internal: Vec<T>,
    pub external: Vec<T>,
}

fn ego_contributions<T: Scalar>(g: &AttributedGraph<T>, feats: &Matrix<T>, i: usize) -> (Vec<T>, Vec<T>) {
    let d = feats.cols();
    let two_m = T::of_usize(2 * g.edge_count());
    let mut ego: Vec<usize> = g.neighbors(i).to_vec();
    ego.push(i);
    ego.sort_unstable();
    let in_ego = |v: usize| ego.binary_search(&v).is_ok();

    let mut internal = vec![T::zero(); d];
    let mut external = vec![T::zero(); d];
    let mut weighted = vec![T::zero(); d];
    for &p in &ego {
        let fp = feats.row(p);
        let kp = T::of_usize(g.degree(p));
        for f in 0..d {
            weighted[f] = weighted[f] + kp * fp[f];
        }
        for &q in g.neighbors(p) {
            let fq = feats.row(q);
            if in_ego(q) {
                // each internal edge appears once from each endpoint, matching
                // the ordered double sum
                for f in 0..d {
                    internal[f] = internal[f] + fp[f] * fq[f];
                }
            } else {
                let kq = T::of_usize(g.degree(q));
                let w = T::one() - (kp * kq / two_m).min(T::one());
                for f in 0..d {
                    external[f] = external[f] - w * fp[f] * fq[f];
                }
            }
        }
    }
    if two_m > T::zero() {
        for f in 0..d {
            internal[f] = internal[f] - weighted[f] * weighted[f] / two_m;
        }
    }
    (internal, external)
}

fn size_normalize<T: Scalar>(v: &[T], lo: T, hi: T) -> Vec<T> {
    let scale = v.iter().fold(T::one(), |a, &x| a.max(x.abs()));
    v.iter().map(|&x| (x / scale).max(lo).min(hi)).collect()
}

/// Rescaled contributions `x̂_I ∈ [0,1]^d`, `x̂_E ∈ [-1,0]^d` for node `i`.
pub fn amen_ego_contributions<T: Scalar>(
    g: &AttributedGraph<T>,
    rescaled: &Matrix<T>,
    i: usize,
) -> EgoContributions<T> {
    let (xi, xe) = ego_contributions(g, rescaled, i);
    EgoContributions {
        internal: size_normalize(&xi, T::zero(), T::one()),
        external: size_normalize(&xe, -T::one(), T::zero()),
    }
}

/// Closed-form L2 normality of a combined contribution vector.
pub fn l2_normality<T: Scalar>(x: &[T]) -> T {
    if x.iter().any(|&v| v > T::zero()) {
        x.iter().map(|&v| v.max(T::zero())).map(|v| v * v).sum::<T>().sqrt()
    } else {
        x.iter().fold(T::neg_infinity(), |a, &v| a.max(v))
    }
}

/// `-N*(C_i)` of each node's ego network; valid for degree >= 2.
pub fn amen_ego_scores<T: Scalar>(g: &AttributedGraph<T>, pf: &ProjectedFeatures<T>) -> RawHeuristicScores<T> {
    let rescaled = minmax_rescale(&pf.normalized);
    let values = (0..g.node_count())
        .into_par_iter()
        .map(|i| {
            let c = amen_ego_contributions(g, &rescaled, i);
            let x: Vec<T> = c.internal.iter().zip(&c.external).map(|(&a, &b)| a + b).collect();
            -l2_normality(&x)
        })
        .collect();
    RawHeuristicScores::new(g, values, 2)
}
