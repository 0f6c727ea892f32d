//! Small dense linear-algebra kernel: row-major matrices, Householder QR and
//! one-sided Jacobi SVD. Everything here is single-threaded so results are
//! bitwise reproducible.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        // chunks_exact panics on zero chunk size
        let cols = self.cols.max(1);
        self.data.chunks_exact(cols).take(self.rows)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            let o = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &aik) in a.iter().enumerate() {
                if aik == T::zero() {
                    continue;
                }
                for (oj, &bkj) in o.iter_mut().zip(other.row(k)) {
                    *oj = *oj + aik * bkj;
                }
            }
        }
        out
    }

    pub fn scale(&self, alpha: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * alpha).collect(),
        }
    }

    /// Column-major copy, one `Vec` per column.
    pub fn to_columns(&self) -> Vec<Vec<T>> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).collect())
            .collect()
    }

    pub fn from_columns(columns: &[Vec<T>], rows: usize) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Householder reflectors for a tall column set (m >= p). Each reflector is
/// stored with its squared norm; a zero norm means the step was skipped.
struct Householder<T> {
    vectors: Vec<(Vec<T>, T)>,
}

impl<T: Scalar> Householder<T> {
    /// Factorizes `cols` in place. On return the upper triangle of `cols`
    /// holds R.
    fn factor(cols: &mut [Vec<T>], m: usize) -> Self {
        let p = cols.len();
        let two = T::of(2.0);
        let mut vectors = Vec::with_capacity(p);
        for j in 0..p.min(m) {
            let x = &cols[j][j..];
            let norm = norm2(x);
            if norm == T::zero() {
                vectors.push((vec![T::zero(); m - j], T::zero()));
                continue;
            }
            let alpha = if x[0] > T::zero() { -norm } else { norm };
            let mut v = x.to_vec();
            v[0] = v[0] - alpha;
            let vnorm2 = dot(&v, &v);
            if vnorm2 == T::zero() {
                vectors.push((v, T::zero()));
                continue;
            }
            for col in cols.iter_mut().skip(j) {
                let seg = &mut col[j..];
                let f = two * dot(&v, seg) / vnorm2;
                for (s, &vi) in seg.iter_mut().zip(&v) {
                    *s = *s - f * vi;
                }
            }
            vectors.push((v, vnorm2));
        }
        Self { vectors }
    }

    /// Thin Q (m x p) as columns.
    fn thin_q(&self, m: usize, p: usize) -> Vec<Vec<T>> {
        let two = T::of(2.0);
        let mut q: Vec<Vec<T>> = (0..p)
            .map(|c| {
                let mut e = vec![T::zero(); m];
                e[c] = T::one();
                e
            })
            .collect();
        for (j, (v, vnorm2)) in self.vectors.iter().enumerate().rev() {
            if *vnorm2 == T::zero() {
                continue;
            }
            for col in q.iter_mut() {
                let seg = &mut col[j..];
                let f = two * dot(v, seg) / *vnorm2;
                for (s, &vi) in seg.iter_mut().zip(v) {
                    *s = *s - f * vi;
                }
            }
        }
        q
    }
}

/// Thin QR of a tall matrix given as columns (each of length `m >= cols.len()`).
/// Returns `(Q, R)`; Q is m x p as columns, R is p x p as columns.
pub fn thin_qr<T: Scalar>(mut cols: Vec<Vec<T>>, m: usize) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
    let p = cols.len();
    debug_assert!(m >= p);
    let h = Householder::factor(&mut cols, m);
    let r = upper_triangle(&cols, p);
    (h.thin_q(m, p), r)
}

fn upper_triangle<T: Scalar>(cols: &[Vec<T>], p: usize) -> Vec<Vec<T>> {
    cols.iter()
        .enumerate()
        .map(|(j, c)| (0..p).map(|i| if i <= j { c[i] } else { T::zero() }).collect())
        .collect()
}

/// Singular values and right singular vectors of a tall matrix (m >= p)
/// given as columns. Values are sorted in descending order; `v[j]` is the
/// j-th right singular vector.
pub fn right_singular<T: Scalar>(mut cols: Vec<Vec<T>>, m: usize) -> (Vec<T>, Vec<Vec<T>>) {
    let p = cols.len();
    assert!(m >= p, "right_singular expects a tall matrix");
    let square = if m > p {
        Householder::factor(&mut cols, m);
        upper_triangle(&cols, p)
    } else {
        cols
    };
    jacobi(square)
}

/// One-sided (Hestenes) Jacobi on a square matrix given as columns.
fn jacobi<T: Scalar>(mut a: Vec<Vec<T>>) -> (Vec<T>, Vec<Vec<T>>) {
    let p = a.len();
    let mut v: Vec<Vec<T>> = (0..p)
        .map(|c| {
            let mut e = vec![T::zero(); p];
            e[c] = T::one();
            e
        })
        .collect();
    let eps = T::epsilon();
    const MAX_SWEEPS: usize = 80;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..p {
            for j in (i + 1)..p {
                let alpha = dot(&a[i], &a[i]);
                let beta = dot(&a[j], &a[j]);
                let gamma = dot(&a[i], &a[j]);
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::of(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, i, j, c, s);
                rotate(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<T> = a.iter().map(|c| norm2(c)).collect();
    let mut order: Vec<usize> = (0..p).collect();
    // stable sort keeps the column order for exact ties
    order.sort_by(|&x, &y| sigma[y].partial_cmp(&sigma[x]).expect("finite singular values"));
    (
        order.iter().map(|&k| sigma[k]).collect(),
        order.iter().map(|&k| v[k].clone()).collect(),
    )
}

fn rotate<T: Scalar>(cols: &mut [Vec<T>], i: usize, j: usize, c: T, s: T) {
    let (lo, hi) = cols.split_at_mut(j);
    let (ci, cj) = (&mut lo[i], &mut hi[0]);
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_reconstructs_input() {
        let a = Matrix::from_fn(7, 3, |i, j| ((i * 3 + j) as f64).sin() + (j as f64));
        let (q, r) = thin_qr(a.to_columns(), 7);
        let q = Matrix::from_columns(&q, 7);
        let r = Matrix::from_columns(&r, 3);
        let back = q.matmul(&r);
        for (x, y) in back.as_slice().iter().zip(a.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
        let qtq = q.transpose().matmul(&q);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((qtq.get(i, j) - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_recovers_diagonal_spectrum() {
        let a = Matrix::from_fn(4, 3, |i, j| if i == j { [1.0f64, 5.0, 3.0][i] } else { 0.0 });
        let (s, v) = right_singular(a.to_columns(), 4);
        assert_eq!(s.len(), 3);
        for (x, y) in s.iter().zip([5.0, 3.0, 1.0]) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!((v[0][1].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_matrix_has_zero_singular_values() {
        let a = Matrix::from_fn(6, 3, |i, _| i as f64 + 1.0);
        let (s, _) = right_singular(a.to_columns(), 6);
        assert!(s[0] > 1.0);
        assert!(s[1].abs() < 1e-12 && s[2].abs() < 1e-12);
    }

    #[test]
    fn matmul_small() {
        let a = Matrix::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Matrix::new(2, 1, vec![1.0, 1.0]).unwrap();
        assert_eq!(a.matmul(&b).as_slice(), &[3.0, 7.0]);
        assert!(Matrix::<f64>::new(2, 2, vec![1.0]).is_err());
    }
}
