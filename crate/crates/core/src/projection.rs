//! Rank-r SVD projection of node features followed by l1 row normalization,
//! with cached l2-unit rows for cosine similarity.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::linalg::{norm2, right_singular, thin_qr, Matrix};
use crate::scalar::Scalar;

pub const DEFAULT_RANK: usize = 8;

/// Inputs whose smaller side is at most this size use the exact solver.
pub const EXACT_SVD_MAX_DIM: usize = 64;
pub const POWER_ITERATIONS: usize = 4;
pub const OVERSAMPLING: usize = 10;

/// Rows with a smaller norm than this are treated as zero vectors.
pub const ZERO_ROW_EPS: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedFeatures<T> {
    /// `U_k Σ_k`, one row per node.
    pub projected: Matrix<T>,
    /// l1-normalized rows of `projected`.
    pub normalized: Matrix<T>,
    /// l2-unit rows of `normalized` (zero rows stay zero).
    pub directions: Matrix<T>,
    pub rank_used: usize,
    pub seed: u64,
}

impl<T: Scalar> ProjectedFeatures<T> {
    /// Derives the normalized and direction matrices from an already
    /// projected matrix.
    pub fn from_projection(projected: Matrix<T>, seed: u64) -> Self {
        let normalized = l1_normalize_rows(&projected);
        let directions = unit_directions(&normalized);
        Self {
            rank_used: projected.cols(),
            projected,
            normalized,
            directions,
            seed,
        }
    }

    pub fn node_count(&self) -> usize {
        self.projected.rows()
    }
}

/// Projects `g`'s features onto their top `r` singular directions.
pub fn project<T: Scalar>(g: &AttributedGraph<T>, r: usize, seed: u64) -> Result<ProjectedFeatures<T>> {
    let projected = truncated_svd(g.features(), r, seed)?;
    Ok(ProjectedFeatures::from_projection(projected, seed))
}

/// Returns `U[:, :k] Σ[:k]` with `k = min(r, n, d)`, columns ordered by
/// descending singular value and each column's largest-magnitude entry made
/// positive.
pub fn truncated_svd<T: Scalar>(x: &Matrix<T>, r: usize, seed: u64) -> Result<Matrix<T>> {
    let (n, d) = x.shape();
    if n == 0 || d == 0 {
        return Err(Error::Precondition(format!("cannot project a {n}x{d} matrix")));
    }
    if r == 0 {
        return Err(Error::Argument("projection rank must be at least 1".into()));
    }
    if !x.is_finite() {
        return Err(Error::Validation("feature matrix contains non-finite values".into()));
    }
    let k = r.min(n).min(d);
    let mut out = if n.min(d) <= EXACT_SVD_MAX_DIM {
        exact_projection(x, k)
    } else {
        randomized_projection(x, k, seed)
    };
    fix_signs(&mut out);
    Ok(out)
}

fn exact_projection<T: Scalar>(x: &Matrix<T>, k: usize) -> Matrix<T> {
    let (n, d) = x.shape();
    if n >= d {
        let (_, v) = right_singular(x.to_columns(), n);
        let vk = Matrix::from_columns(&v[..k], d);
        x.matmul(&vk)
    } else {
        // Right singular vectors of X^T are the left singular vectors of X.
        let rows: Vec<Vec<T>> = x.iter_rows().map(<[T]>::to_vec).collect();
        let (sigma, u) = right_singular(rows, d);
        Matrix::from_fn(n, k, |i, j| u[j][i] * sigma[j])
    }
}

fn randomized_projection<T: Scalar>(x: &Matrix<T>, k: usize, seed: u64) -> Matrix<T> {
    let (n, d) = x.shape();
    let l = (k + OVERSAMPLING).min(n).min(d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = Matrix::from_fn(d, l, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        T::of(z)
    });
    let xt = x.transpose();
    let orth = |m: &Matrix<T>| {
        let (q, _) = thin_qr(m.to_columns(), m.rows());
        Matrix::from_columns(&q, m.rows())
    };
    let mut q = orth(&x.matmul(&omega));
    for _ in 0..POWER_ITERATIONS {
        let z = orth(&xt.matmul(&q));
        q = orth(&x.matmul(&z));
    }
    // B = Q^T X is l x d with l <= d; its left singular vectors are the right
    // singular vectors of B^T.
    let b = q.transpose().matmul(x);
    let (sigma, w) = right_singular(b.iter_rows().map(<[T]>::to_vec).collect(), d);
    let wk = Matrix::from_fn(l, k, |i, j| w[j][i] * sigma[j]);
    q.matmul(&wk)
}

fn fix_signs<T: Scalar>(m: &mut Matrix<T>) {
    let (n, k) = m.shape();
    for j in 0..k {
        let mut best = 0;
        for i in 1..n {
            if m.get(i, j).abs() > m.get(best, j).abs() {
                best = i;
            }
        }
        if m.get(best, j) < T::zero() {
            for i in 0..n {
                m.set(i, j, -m.get(i, j));
            }
        }
    }
}

/// Divides each row by its l1 norm; near-zero rows become exactly zero.
pub fn l1_normalize_rows<T: Scalar>(p: &Matrix<T>) -> Matrix<T> {
    normalize_rows(p, |row| row.iter().fold(T::zero(), |a, &x| a + x.abs()))
}

/// Divides each row by its l2 norm; near-zero rows become exactly zero.
pub fn unit_directions<T: Scalar>(xn: &Matrix<T>) -> Matrix<T> {
    normalize_rows(xn, norm2)
}

fn normalize_rows<T: Scalar>(p: &Matrix<T>, norm: impl Fn(&[T]) -> T) -> Matrix<T> {
    let mut out = p.clone();
    let eps = T::of(ZERO_ROW_EPS);
    for i in 0..p.rows() {
        let row = out.row_mut(i);
        let s = norm(row);
        if s < eps {
            row.iter_mut().for_each(|x| *x = T::zero());
        } else {
            row.iter_mut().for_each(|x| *x = *x / s);
        }
    }
    out
}
