//! Dense Hermitian eigendecompositions, singular values, and condition
//! numbers, backed by faer. Matrices cross this boundary as row-major
//! `&[Complex64]` slices so the rest of the crate stays independent of the
//! backend types.

use faer::linalg::solvers::DenseSolveCore;
use faer::prelude::*;
use num_complex::Complex64;

fn to_mat(matrix: &[Complex64], n: usize) -> Mat<c64> {
    assert_eq!(matrix.len(), n * n);
    Mat::from_fn(n, n, |i, j| matrix[i * n + j])
}

/// Full Hermitian eigendecomposition. Returns eigenvalues in ascending
/// order and eigenvectors as column-major storage (column j is the
/// eigenvector of the j-th eigenvalue).
pub(crate) fn hermitian_eigen(matrix: &[Complex64], n: usize) -> (Vec<f64>, Vec<Complex64>) {
    let m = to_mat(matrix, n);
    let eig = m
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("hermitian eigendecomposition failed");
    let s = eig.S();
    let u = eig.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let mut values = Vec::with_capacity(n);
    let mut vectors = vec![Complex64::default(); n * n];
    for (col, &src) in order.iter().enumerate() {
        values.push(s[src].re);
        for row in 0..n {
            vectors[col * n + row] = u[(row, src)];
        }
    }
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn hermitian_eigenvalues(matrix: &[Complex64], n: usize) -> Vec<f64> {
    let m = to_mat(matrix, n);
    let mut vals = m
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("hermitian eigenvalues failed");
    vals.sort_by(f64::total_cmp);
    vals
}

/// Singular values, descending.
pub(crate) fn singular_values(matrix: &[Complex64], n: usize) -> Vec<f64> {
    let m = to_mat(matrix, n);
    let mut vals = m.singular_values().expect("svd failed");
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

/// 2-norm condition number σ_max/σ_min.
pub(crate) fn cond2(matrix: &[Complex64], n: usize) -> f64 {
    let sv = singular_values(matrix, n);
    let max = sv.first().copied().unwrap_or(0.0);
    let min = sv.last().copied().unwrap_or(0.0);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// 1-norm condition number ‖Q‖₁·‖Q⁻¹‖₁ via LU inversion.
pub(crate) fn cond1(matrix: &[Complex64], n: usize) -> f64 {
    let m = to_mat(matrix, n);
    let inv = m.partial_piv_lu().inverse();
    one_norm_mat(&m) * one_norm_mat(&inv)
}

fn one_norm_mat(m: &Mat<c64>) -> f64 {
    let (rows, cols) = (m.nrows(), m.ncols());
    (0..cols)
        .map(|j| (0..rows).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_diagonal() {
        let n = 3;
        let mut m = vec![Complex64::default(); n * n];
        for (i, v) in [3.0, 1.0, 2.0].iter().enumerate() {
            m[i * n + i] = Complex64::new(*v, 0.0);
        }
        let (vals, vecs) = hermitian_eigen(&m, n);
        assert!((vals[0] - 1.0).abs() < 1e-14);
        assert!((vals[2] - 3.0).abs() < 1e-14);
        // First column is e_1 up to phase.
        assert!((vecs[0 * n + 1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cond_of_diagonal() {
        let n = 2;
        let mut m = vec![Complex64::default(); n * n];
        m[0] = Complex64::new(4.0, 0.0);
        m[3] = Complex64::new(0.5, 0.0);
        assert!((cond2(&m, n) - 8.0).abs() < 1e-12);
        assert!((cond1(&m, n) - 8.0).abs() < 1e-12);
    }
}
