//! Stochastic-block-model benchmark graphs with a target edge homophily,
//! Gaussian community features, and neighborhood-rewiring anomalies.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::diversity::pair_from_index;
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

const FEASIBILITY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyType {
    TypeH,
    TypeD,
    Mixed,
}

/// Tag of a single injected anomaly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyKind {
    /// Every neighbor drawn from the node's own community.
    TypeH,
    /// Each neighbor drawn from a uniformly chosen community.
    TypeD,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n: usize,
    pub communities: usize,
    pub target_homophily: f64,
    pub avg_degree: f64,
    pub feature_dim: usize,
    pub center_variance: f64,
    pub noise_variance: f64,
    pub anomaly_type: AnomalyType,
    pub anomalies_per_type: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n: 2000,
            communities: 5,
            target_homophily: 0.5,
            avg_degree: 15.0,
            feature_dim: 50,
            center_variance: 9.0,
            noise_variance: 1.0,
            anomaly_type: AnomalyType::Mixed,
            anomalies_per_type: 50,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Spec(m));
        if self.communities == 0 || self.n == 0 {
            return err("node and community counts must be positive".into());
        }
        if self.n % self.communities != 0 {
            return err(format!(
                "{} nodes cannot be split into {} equal communities",
                self.n, self.communities
            ));
        }
        if !(self.target_homophily > 0.0 && self.target_homophily < 1.0) {
            return err(format!("homophily {} outside (0, 1)", self.target_homophily));
        }
        if !(self.avg_degree > 0.0) || !self.avg_degree.is_finite() {
            return err("average degree must be positive".into());
        }
        if self.feature_dim == 0 {
            return err("feature dimension must be positive".into());
        }
        if !(self.center_variance >= 0.0 && self.noise_variance >= 0.0) {
            return err("variances must be non-negative".into());
        }
        Ok(())
    }

    pub fn community_size(&self) -> usize {
        self.n / self.communities
    }

    fn counts(&self) -> (usize, usize) {
        match self.anomaly_type {
            AnomalyType::TypeH => (self.anomalies_per_type, 0),
            AnomalyType::TypeD => (0, self.anomalies_per_type),
            AnomalyType::Mixed => (self.anomalies_per_type, self.anomalies_per_type),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticGraph<T> {
    pub graph: AttributedGraph<T>,
    pub communities: Vec<usize>,
    /// Edge homophily of the graph before anomaly injection.
    pub measured_homophily: f64,
    pub anomalies: Vec<(usize, AnomalyKind)>,
}

/// Intra- and inter-community edge probabilities giving an expected degree
/// of `avg_degree`, a fraction `h` of it inside the node's community.
pub fn sbm_probabilities(spec: &SyntheticSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let n = spec.n as f64;
    let s = spec.community_size() as f64;
    let (p_in, p_out) = if spec.communities == 1 {
        (spec.avg_degree / (n - 1.0), 0.0)
    } else {
        (
            spec.avg_degree * spec.target_homophily / (s - 1.0),
            spec.avg_degree * (1.0 - spec.target_homophily) / (n - s),
        )
    };
    for (name, p) in [("p_in", p_in), ("p_out", p_out)] {
        if !p.is_finite() || p > 1.0 + FEASIBILITY_EPS {
            return Err(Error::Spec(format!(
                "{name} = {p} is not a probability; lower the average degree or change the homophily"
            )));
        }
    }
    Ok((p_in.clamp(0.0, 1.0), p_out.clamp(0.0, 1.0)))
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Indices `0..total` kept independently with probability `p`, visited in
/// increasing order via geometric skips.
fn bernoulli_indices<R: Rng>(total: usize, p: f64, rng: &mut R, mut keep: impl FnMut(usize)) {
    if p <= 0.0 || total == 0 {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(keep);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut idx: f64 = -1.0;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        idx += 1.0 + (u.ln() / log_q).floor();
        if idx >= total as f64 {
            break;
        }
        keep(idx as usize);
    }
}

/// Samples the background SBM graph (no anomalies, all labels 0).
pub fn generate_sbm<T: Scalar>(spec: &SyntheticSpec) -> Result<SyntheticGraph<T>> {
    let (p_in, p_out) = sbm_probabilities(spec)?;
    let (n, k, s, dim) = (spec.n, spec.communities, spec.community_size(), spec.feature_dim);
    let communities: Vec<usize> = (0..n).map(|i| i / s).collect();

    let mut rng = stream(spec.seed, 0);
    let center_sd = spec.center_variance.sqrt();
    let noise_sd = spec.noise_variance.sqrt();
    let normal = |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..dim).map(|_| center_sd * normal(&mut rng)).collect())
        .collect();
    let mut data = Vec::with_capacity(n * dim);
    for &c in &communities {
        for f in 0..dim {
            data.push(T::of(centers[c][f] + noise_sd * normal(&mut rng)));
        }
    }
    let features = Matrix::new(n, dim, data)?;

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut add = |u: usize, v: usize| {
        adj[u].push(v);
        adj[v].push(u);
    };
    for a in 0..k {
        let base = a * s;
        bernoulli_indices(s * (s - 1) / 2, p_in, &mut rng, |m| {
            let (p, q) = pair_from_index(m);
            add(base + p, base + q);
        });
        for b in (a + 1)..k {
            let other = b * s;
            bernoulli_indices(s * s, p_out, &mut rng, |m| add(base + m / s, other + m % s));
        }
    }
    let graph = AttributedGraph::from_adjacency(adj, features)
        .with_labels(vec![0; n])?
        .with_communities(communities.clone())?;
    let measured_homophily = homophily_ratio(&graph, &communities).unwrap_or(f64::NAN);
    Ok(SyntheticGraph {
        graph,
        communities,
        measured_homophily,
        anomalies: Vec::new(),
    })
}

/// Fraction of edges whose endpoints share a community.
pub fn homophily_ratio<T: Scalar>(g: &AttributedGraph<T>, communities: &[usize]) -> Result<f64> {
    if communities.len() != g.node_count() {
        return Err(Error::Dimension(format!(
            "{} community entries for {} nodes",
            communities.len(),
            g.node_count()
        )));
    }
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::DegenerateGraph("homophily of a graph without edges".into()));
    }
    let same = g.edges().filter(|&(u, v)| communities[u] == communities[v]).count();
    Ok(same as f64 / m as f64)
}

/// Rewires the neighborhoods of randomly chosen degree>=2 nodes. Each
/// anomaly keeps its original degree; its new neighbors are never other
/// anomalies.
pub fn inject_anomalies<T: Scalar>(sg: SyntheticGraph<T>, spec: &SyntheticSpec) -> Result<SyntheticGraph<T>> {
    spec.validate()?;
    let g = &sg.graph;
    let n = g.node_count();
    let k = spec.communities;
    let comm = &sg.communities;
    let mut rng = stream(spec.seed, 1);

    let degrees: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();
    let candidates: Vec<usize> = (0..n).filter(|&i| degrees[i] >= 2).collect();
    let (want_h, want_d) = spec.counts();
    if want_h + want_d > candidates.len() {
        return Err(Error::Spec(format!(
            "{} anomalies requested but only {} nodes have degree >= 2",
            want_h + want_d,
            candidates.len()
        )));
    }

    let order = index::sample(&mut rng, candidates.len(), candidates.len());
    let mut per_comm = vec![0usize; k];
    let mut chosen: Vec<(usize, AnomalyKind)> = Vec::with_capacity(want_h + want_d);
    let comm_size = spec.community_size();
    let mut h_count = 0;
    let mut d_count = 0;
    for idx in order.iter() {
        if h_count == want_h && d_count == want_d {
            break;
        }
        let v = candidates[idx];
        // room left in the community once every anomaly is excluded
        let room = comm_size - 1 - per_comm[comm[v]];
        if h_count < want_h {
            if degrees[v] <= room {
                chosen.push((v, AnomalyKind::TypeH));
                per_comm[comm[v]] += 1;
                h_count += 1;
            }
            continue;
        }
        chosen.push((v, AnomalyKind::TypeD));
        per_comm[comm[v]] += 1;
        d_count += 1;
    }
    if h_count < want_h || d_count < want_d {
        return Err(Error::Spec(format!(
            "could only place {h_count}/{want_h} homogeneous and {d_count}/{want_d} diverse anomalies"
        )));
    }

    let is_anomaly: Vec<bool> = {
        let mut m = vec![false; n];
        chosen.iter().for_each(|&(v, _)| m[v] = true);
        m
    };
    let pools: Vec<Vec<usize>> = (0..k)
        .map(|c| (c * comm_size..(c + 1) * comm_size).filter(|&v| !is_anomaly[v]).collect())
        .collect();
    for &(v, kind) in &chosen {
        if kind == AnomalyKind::TypeH && pools[comm[v]].len() < degrees[v] {
            return Err(Error::Spec(format!(
                "community {} has too few members to rewire node {v} of degree {}",
                comm[v], degrees[v]
            )));
        }
    }
    let pool_total: usize = pools.iter().map(Vec::len).sum();

    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|i| g.neighbors(i).iter().copied().collect()).collect();
    for &(v, kind) in &chosen {
        for u in std::mem::take(&mut adj[v]) {
            adj[u].remove(&v);
        }
        let d = degrees[v];
        let new: Vec<usize> = match kind {
            AnomalyKind::TypeH => {
                let pool = &pools[comm[v]];
                index::sample(&mut rng, pool.len(), d).iter().map(|i| pool[i]).collect()
            }
            AnomalyKind::TypeD => {
                if pool_total < d {
                    return Err(Error::Spec(format!("too few normal nodes to rewire node {v}")));
                }
                let mut picked = BTreeSet::new();
                let mut out = Vec::with_capacity(d);
                while out.len() < d {
                    let pool = &pools[rng.random_range(0..k)];
                    if pool.is_empty() {
                        continue;
                    }
                    let u = pool[rng.random_range(0..pool.len())];
                    if picked.insert(u) {
                        out.push(u);
                    }
                }
                out
            }
        };
        for u in new {
            adj[v].insert(u);
            adj[u].insert(v);
        }
    }

    let mut labels = vec![0u8; n];
    chosen.iter().for_each(|&(v, _)| labels[v] = 1);
    let features = g.features().clone();
    let graph = AttributedGraph::from_adjacency(adj.into_iter().map(|s| s.into_iter().collect()).collect(), features)
        .with_labels(labels)?
        .with_communities(sg.communities.clone())?;
    Ok(SyntheticGraph {
        graph,
        communities: sg.communities,
        measured_homophily: sg.measured_homophily,
        anomalies: chosen,
    })
}

/// Background graph plus injected anomalies.
pub fn generate<T: Scalar>(spec: &SyntheticSpec) -> Result<SyntheticGraph<T>> {
    inject_anomalies(generate_sbm(spec)?, spec)
}
