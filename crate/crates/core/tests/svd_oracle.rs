mod common;

use nalgebra::DMatrix;
use ndiv_core::projection::{l1_normalize_rows, truncated_svd, unit_directions};
use ndiv_core::Matrix;

/// `U_k Σ_k` from nalgebra with the same sign convention.
fn oracle_projection(x: &Matrix<f64>, k: usize) -> Vec<Vec<f64>> {
    let (n, d) = x.shape();
    let m = DMatrix::from_fn(n, d, |i, j| x.get(i, j));
    let svd = m.svd(true, false);
    let u = svd.u.unwrap();
    let mut cols = Vec::new();
    for j in 0..k {
        let mut c: Vec<f64> = (0..n).map(|i| u[(i, j)] * svd.singular_values[j]).collect();
        let mut best = 0;
        for i in 1..n {
            if c[i].abs() > c[best].abs() {
                best = i;
            }
        }
        if c[best] < 0.0 {
            c.iter_mut().for_each(|v| *v = -*v);
        }
        cols.push(c);
    }
    cols
}

fn assert_matches_oracle(x: &Matrix<f64>, k: usize, tol: f64) {
    let p = truncated_svd(x, k, 5).unwrap();
    let want = oracle_projection(x, k);
    assert_eq!(p.cols(), k);
    for (j, col) in want.iter().enumerate() {
        for (i, &w) in col.iter().enumerate() {
            assert!((p.get(i, j) - w).abs() <= tol, "({i},{j}): {} vs {w}", p.get(i, j));
        }
    }
}

#[test]
fn wide_exact_path_matches_nalgebra() {
    let x = common::gaussian_matrix(20, 50, &mut common::rng(1));
    assert_matches_oracle(&x, 8, 1e-8);
}

#[test]
fn tall_exact_path_matches_nalgebra() {
    let x = common::gaussian_matrix(60, 20, &mut common::rng(2));
    assert_matches_oracle(&x, 8, 1e-8);
}

#[test]
fn randomized_path_matches_nalgebra_on_decaying_spectrum() {
    // Singular values 2^-i give a wide gap after the leading block.
    let (n, d, r) = (200, 100, 30);
    let mut g = common::rng(3);
    let a = common::gaussian_matrix(n, r, &mut g);
    let b = common::gaussian_matrix(r, d, &mut g);
    let qa = DMatrix::from_fn(n, r, |i, j| a.get(i, j)).qr().q();
    let qb = DMatrix::from_fn(d, r, |i, j| b.get(j, i)).qr().q();
    let s = DMatrix::from_fn(r, r, |i, j| if i == j { 0.5f64.powi(i as i32) } else { 0.0 });
    let m = &qa * s * qb.transpose();
    let x = Matrix::from_fn(n, d, |i, j| m[(i, j)]);
    assert_matches_oracle(&x, 8, 1e-8);
}

#[test]
fn normalized_rows_have_unit_l1_and_l2() {
    let x = common::gaussian_matrix(40, 12, &mut common::rng(4));
    let p = truncated_svd(&x, 8, 0).unwrap();
    let xn = l1_normalize_rows(&p);
    let u = unit_directions(&xn);
    for i in 0..40 {
        let l1: f64 = xn.row(i).iter().map(|v| v.abs()).sum();
        let l2: f64 = u.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((l1 - 1.0).abs() < 1e-9);
        assert!((l2 - 1.0).abs() < 1e-9);
    }
}

#[test]
fn f32_projection_agrees_with_f64() {
    let x = common::gaussian_matrix(30, 10, &mut common::rng(5));
    let x32 = Matrix::from_fn(30, 10, |i, j| x.get(i, j) as f32);
    let p64 = truncated_svd(&x, 4, 0).unwrap();
    let p32 = truncated_svd(&x32, 4, 0).unwrap();
    for i in 0..30 {
        for j in 0..4 {
            assert!((p64.get(i, j) - p32.get(i, j) as f64).abs() < 1e-3);
        }
    }
}
