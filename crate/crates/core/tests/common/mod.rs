#![allow(dead_code)]

pub mod oracles;

use ndiv_core::{AttributedGraph, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(n: usize, d: usize, r: &mut ChaCha8Rng) -> Matrix<f64> {
    Matrix::from_fn(n, d, |_, _| {
        let z: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, r);
        z
    })
}

/// Erdos-Renyi graph with Gaussian features.
pub fn er_graph(n: usize, p: f64, d: usize, seed: u64) -> AttributedGraph<f64> {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if r.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let x = gaussian_matrix(n, d, &mut r);
    AttributedGraph::build(&edges, x, None).unwrap()
}

/// Dense symmetric 0/1 adjacency.
pub fn dense_adjacency(g: &AttributedGraph<f64>) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for (u, v) in g.edges() {
        a[u][v] = 1.0;
        a[v][u] = 1.0;
    }
    a
}

pub fn rows(m: &Matrix<f64>) -> Vec<Vec<f64>> {
    m.iter_rows().map(|r| r.to_vec()).collect()
}
