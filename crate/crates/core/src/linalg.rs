//! Small dense complex linear algebra: partial-pivot Gaussian elimination
//! and square matrix products.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix = Vec<Vec<Complex64>>;

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
/// Fails when a pivot falls below `pivot_rel` times the largest entry of `A`.
pub fn solve(a: &Matrix, b: &[Complex64], pivot_rel: f64) -> Result<Vec<Complex64>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument(format!("solve needs a square {n}x{n} system")));
    }
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::IllConditioned("matrix is zero or non-finite".into()));
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let (piv, mag) = (col..n)
            .map(|r| (r, m[r][col].norm()))
            .fold((col, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if mag <= pivot_rel * scale {
            return Err(Error::IllConditioned(format!("pivot {mag:e} in column {col} is negligible")));
        }
        m.swap(col, piv);
        x.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in col..n {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
            let v = x[col];
            x[r] -= f * v;
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for c in col + 1..n {
            s -= m[col][c] * x[c];
        }
        x[col] = s / m[col][col];
    }
    Ok(x)
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, Vec::len);
    let mut out = vec![vec![Complex64::new(0.0, 0.0); m]; n];
    for i in 0..n {
        for l in 0..k {
            let v = a[i][l];
            for j in 0..m {
                out[i][j] += v * b[l][j];
            }
        }
    }
    out
}

/// Largest entry of `|A - I|`.
pub fn identity_defect(a: &Matrix) -> (f64, (usize, usize)) {
    let mut worst = (0.0, (0, 0));
    for (i, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            let d = (v - target).norm();
            if d > worst.0 || d.is_nan() {
                worst = (d, (i, j));
            }
        }
    }
    worst
}
