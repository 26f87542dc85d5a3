//! Small dense helpers over `Vec<f64>` rows; nalgebra is used where a
//! factorization is needed.

use nalgebra::DMatrix;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

pub fn scale(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

pub fn matvec(rows: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    rows.iter().map(|r| dot(r, x)).collect()
}

/// `a ⊗ b` with `a`'s index outermost.
pub fn kron_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|y| x * y));
    }
    out
}

pub fn to_matrix(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

pub fn singular_values(rows: &[Vec<f64>], ncols: usize) -> Vec<f64> {
    if rows.is_empty() || ncols == 0 {
        return Vec::new();
    }
    let m = to_matrix(rows, ncols);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Numerical rank relative to the largest singular value.
pub fn rank(rows: &[Vec<f64>], ncols: usize, tol: f64) -> usize {
    let s = singular_values(rows, ncols);
    let top = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&v| v > tol * top.max(1.0)).count()
}

/// Smallest singular value of a matrix with at least as many rows as columns.
pub fn sigma_min(rows: &[Vec<f64>], ncols: usize) -> f64 {
    let s = singular_values(rows, ncols);
    if s.len() < ncols {
        return 0.0;
    }
    s.last().copied().unwrap_or(0.0)
}

/// Least-squares solution of `A x = b`.
pub fn lstsq(rows: &[Vec<f64>], ncols: usize, b: &[f64]) -> Option<Vec<f64>> {
    let m = to_matrix(rows, ncols);
    let svd = m.svd(true, true);
    let rhs = nalgebra::DVector::from_column_slice(b);
    svd.solve(&rhs, 1e-12).ok().map(|v| v.iter().copied().collect())
}
