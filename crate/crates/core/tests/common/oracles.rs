//! Direct reimplementations used as test oracles: dense loops over `Vec`s
//! and nalgebra for the SVD, no calls into the library's numerics.

use nalgebra::DMatrix;
use ndiv_core::{Fallback, Graph, Reference};

use super::dense_adjacency;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    if na < 1e-15 || nb < 1e-15 {
        return 0.0;
    }
    (a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb)).clamp(-1.0, 1.0)
}

/// Rank-`r` projection via nalgebra, largest-magnitude entry of each column
/// made positive, then l1 rows.
pub fn projection(g: &Graph, r: usize) -> Vec<Vec<f64>> {
    let x = g.features();
    let (n, d) = x.shape();
    let svd = DMatrix::from_fn(n, d, |i, j| x.get(i, j)).svd(true, false);
    let u = svd.u.unwrap();
    let k = r.min(n).min(d);
    let mut p = vec![vec![0.0; k]; n];
    for j in 0..k {
        let mut best = 0;
        for i in 1..n {
            if u[(i, j)].abs() > u[(best, j)].abs() {
                best = i;
            }
        }
        let sign = if u[(best, j)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            p[i][j] = sign * u[(i, j)] * svd.singular_values[j];
        }
    }
    for row in &mut p {
        let l1: f64 = row.iter().map(|v| v.abs()).sum();
        if l1 >= 1e-15 {
            row.iter_mut().for_each(|v| *v /= l1);
        } else {
            row.iter_mut().for_each(|v| *v = 0.0);
        }
    }
    p
}

/// Population variance of all neighbor-pair cosines; `None` below degree 2.
pub fn diversity(g: &Graph, p: &[Vec<f64>]) -> Vec<Option<f64>> {
    (0..g.node_count())
        .map(|i| {
            let nb = g.neighbors(i);
            if nb.len() < 2 {
                return None;
            }
            let mut sims = Vec::new();
            for a in 0..nb.len() {
                for b in (a + 1)..nb.len() {
                    sims.push(cosine(&p[nb[a]], &p[nb[b]]));
                }
            }
            let m = sims.len() as f64;
            let mean = sims.iter().sum::<f64>() / m;
            Some(sims.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / m)
        })
        .collect()
}

fn masked(values: Vec<f64>, g: &Graph, min_degree: usize) -> Vec<Option<f64>> {
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| (g.degree(i) >= min_degree).then_some(v))
        .collect()
}

/// Triangle density by triple loop; valid for degree >= 2.
pub fn lcc(g: &Graph) -> Vec<Option<f64>> {
    let a = dense_adjacency(g);
    let n = a.len();
    let values = (0..n)
        .map(|i| {
            let d = g.degree(i);
            let mut t = 0.0;
            for j in 0..n {
                for k in (j + 1)..n {
                    t += a[i][j] * a[i][k] * a[j][k];
                }
            }
            if d < 2 {
                0.0
            } else {
                2.0 * t / (d * (d - 1)) as f64
            }
        })
        .collect();
    masked(values, g, 2)
}

/// `D^-1/2 A D^-1/2 H` by dense loops.
fn propagate(a: &[Vec<f64>], h: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let deg: Vec<f64> = a.iter().map(|r| r.iter().sum::<f64>().max(1.0)).collect();
    let cols = h.first().map_or(0, Vec::len);
    let mut out = vec![vec![0.0; cols]; n];
    for i in 0..n {
        for j in 0..n {
            let w = a[i][j] / (deg[i] * deg[j]).sqrt();
            if w != 0.0 {
                for c in 0..cols {
                    out[i][c] += w * h[j][c];
                }
            }
        }
    }
    out
}

/// `||x_i - (Â x)_i||`; valid for degree >= 1.
pub fn nrs(g: &Graph, p: &[Vec<f64>]) -> Vec<Option<f64>> {
    let agg = propagate(&dense_adjacency(g), p);
    let values = p
        .iter()
        .zip(&agg)
        .map(|(x, m)| x.iter().zip(m).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .collect();
    masked(values, g, 1)
}

/// Weighted cosine decay across hops; valid for degree >= 1.
pub fn pcd(g: &Graph, p: &[Vec<f64>], weights: &[f64]) -> Vec<Option<f64>> {
    let a = dense_adjacency(g);
    let mut h = p.to_vec();
    let mut values = vec![0.0; p.len()];
    for &w in weights {
        let next = propagate(&a, &h);
        for i in 0..p.len() {
            values[i] += w * (1.0 - cosine(&h[i], &next[i]));
        }
        h = next;
    }
    masked(values, g, 1)
}

/// Negated ego-network normality from its ordered double sums; valid for
/// degree >= 2.
pub fn amen(g: &Graph, p: &[Vec<f64>]) -> Vec<Option<f64>> {
    let n = p.len();
    let dims = p.first().map_or(0, Vec::len);
    let mut f = vec![vec![0.0; dims]; n];
    for c in 0..dims {
        let lo = p.iter().map(|r| r[c]).fold(f64::INFINITY, f64::min);
        let hi = p.iter().map(|r| r[c]).fold(f64::NEG_INFINITY, f64::max);
        for i in 0..n {
            f[i][c] = if hi > lo { (p[i][c] - lo) / (hi - lo) } else { 0.0 };
        }
    }
    let a = dense_adjacency(g);
    let k: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let values = (0..n)
        .map(|i| {
            let ego: Vec<usize> = (0..n).filter(|&v| v == i || a[i][v] == 1.0).collect();
            let mut xi = vec![0.0; dims];
            let mut xe = vec![0.0; dims];
            for &u in &ego {
                for &v in &ego {
                    for c in 0..dims {
                        xi[c] += (a[u][v] - k[u] * k[v] / two_m) * f[u][c] * f[v][c];
                    }
                }
                for b in (0..n).filter(|b| !ego.contains(b) && a[u][*b] == 1.0) {
                    for c in 0..dims {
                        xe[c] -= (1.0 - (k[u] * k[b] / two_m).min(1.0)) * f[u][c] * f[b][c];
                    }
                }
            }
            let scale = |v: &[f64]| v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            let (si, se) = (scale(&xi), scale(&xe));
            let x: Vec<f64> = (0..dims)
                .map(|c| (xi[c] / si).clamp(0.0, 1.0) + (xe[c] / se).clamp(-1.0, 0.0))
                .collect();
            let nstar = if x.iter().any(|&v| v > 0.0) {
                x.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>().sqrt()
            } else {
                x.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            };
            -nstar
        })
        .collect();
    masked(values, g, 2)
}

fn sorted_median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        (v[m / 2 - 1] + v[m / 2]) / 2.0
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let mu = v.iter().sum::<f64>() / v.len() as f64;
    (mu, (v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / v.len() as f64).sqrt())
}

/// Calibrated scores and predictions: reference, absolute deviation,
/// z-score, fallback, `mu + lambda sigma` threshold over evaluated nodes.
pub fn calibrate(raw: &[Option<f64>], reference: Reference, fallback: Fallback, lambda: f64) -> (Vec<f64>, Vec<u8>) {
    let valid: Vec<f64> = raw.iter().flatten().copied().collect();
    let refv = match reference {
        Reference::Median => sorted_median(valid.clone()),
        Reference::Mean => valid.iter().sum::<f64>() / valid.len() as f64,
    };
    let deltas: Vec<Option<f64>> = raw.iter().map(|v| v.map(|x| (x - refv).abs())).collect();
    let (mu, sigma) = mean_std(&deltas.iter().flatten().copied().collect::<Vec<_>>());
    let z: Vec<Option<f64>> = deltas
        .iter()
        .map(|d| d.map(|x| if sigma < 1e-15 { 0.0 } else { (x - mu) / sigma }))
        .collect();
    let fill = if fallback == Fallback::MedianOfValid {
        sorted_median(z.iter().flatten().copied().collect())
    } else {
        0.0
    };
    let scores: Vec<f64> = z.iter().map(|v| v.unwrap_or(fill)).collect();
    let evaluated: Vec<f64> = if fallback == Fallback::ValidOnly {
        z.iter().flatten().copied().collect()
    } else {
        scores.clone()
    };
    let (ms, ss) = mean_std(&evaluated);
    let tau = ms + lambda * ss;
    let preds = scores
        .iter()
        .zip(&z)
        .map(|(&s, v)| u8::from((fallback != Fallback::ValidOnly || v.is_some()) && s > tau))
        .collect();
    (scores, preds)
}

/// Score order used for ranking metrics: descending score, ties by
/// ascending id.
fn order(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    idx
}

/// Fraction of (positive, negative) pairs ranked correctly, ties half.
pub fn auc(s: &[f64], l: &[u8]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for p in (0..s.len()).filter(|&i| l[i] == 1) {
        for q in (0..s.len()).filter(|&i| l[i] == 0) {
            pairs += 1.0;
            wins += if s[p] > s[q] {
                1.0
            } else if s[p] == s[q] {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / pairs
}

/// Step-wise sum of precision times recall increments.
pub fn average_precision(s: &[f64], l: &[u8]) -> f64 {
    let total = l.iter().filter(|&&v| v == 1).count() as f64;
    let (mut ap, mut prev, mut hits) = (0.0, 0.0, 0.0);
    for (n, &v) in order(s).iter().enumerate() {
        hits += l[v] as f64;
        let rec = hits / total;
        ap += (rec - prev) * hits / (n + 1) as f64;
        prev = rec;
    }
    ap
}

pub fn precision_at_k(s: &[f64], l: &[u8], k: usize) -> f64 {
    order(s)[..k].iter().filter(|&&v| l[v] == 1).count() as f64 / k as f64
}

/// Largest CDF gap between the two classes over every observed score.
pub fn ks(s: &[f64], l: &[u8]) -> f64 {
    let pos: Vec<usize> = (0..s.len()).filter(|&i| l[i] == 1).collect();
    let neg: Vec<usize> = (0..s.len()).filter(|&i| l[i] == 0).collect();
    let mut best = 0.0f64;
    for &t in s {
        let fp = pos.iter().filter(|&&i| s[i] <= t).count() as f64 / pos.len() as f64;
        let fq = neg.iter().filter(|&&i| s[i] <= t).count() as f64 / neg.len() as f64;
        best = best.max((fp - fq).abs());
    }
    best
}
