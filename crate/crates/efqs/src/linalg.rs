//! Eigensolver plumbing. faer does the heavy lifting (fast and bit-reproducible
//! run to run); eigenvalues are re-sorted ascending with the matching column
//! permutation so callers can rely on the order.

use crate::error::{Error, Result};
use faer::Mat;
use nalgebra::DMatrix;
use num_complex::Complex64;

fn solver_failure<E: std::fmt::Debug>(e: E) -> Error {
    Error::Domain(format!("self-adjoint eigensolver failed: {e:?}"))
}

fn ascending_permutation(vals: &[f64]) -> Option<Vec<usize>> {
    if vals.windows(2).all(|w| w[0] <= w[1]) {
        return None;
    }
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap().then(a.cmp(&b)));
    Some(idx)
}

/// Eigendecomposition of a real symmetric matrix: ascending eigenvalues and
/// the orthogonal eigenvector matrix (columns in the same order).
pub(crate) fn eigh_real(m: &DMatrix<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = m.nrows();
    let fm = Mat::from_fn(n, n, |i, j| m[(i, j)]);
    let e = fm
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(solver_failure)?;
    let s = e.S().column_vector();
    let mut vals: Vec<f64> = (0..n).map(|i| s[i]).collect();
    let u = e.U();
    let mut vecs = Mat::from_fn(n, n, |i, j| u[(i, j)]);
    if let Some(perm) = ascending_permutation(&vals) {
        let permuted = Mat::from_fn(n, n, |i, j| vecs[(i, perm[j])]);
        vals = perm.iter().map(|&k| vals[k]).collect();
        vecs = permuted;
    }
    Ok((vals, vecs))
}

/// Same for a complex Hermitian matrix. Eigenvalues are real.
pub(crate) fn eigh_complex(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, Mat<faer::c64>)> {
    let n = m.nrows();
    let fm = Mat::<faer::c64>::from_fn(n, n, |i, j| m[(i, j)]);
    let e = fm
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(solver_failure)?;
    let s = e.S().column_vector();
    let mut vals: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let u = e.U();
    let mut vecs = Mat::from_fn(n, n, |i, j| u[(i, j)]);
    if let Some(perm) = ascending_permutation(&vals) {
        let permuted = Mat::from_fn(n, n, |i, j| vecs[(i, perm[j])]);
        vals = perm.iter().map(|&k| vals[k]).collect();
        vecs = permuted;
    }
    Ok((vals, vecs))
}

/// Eigenvalues of a Hermitian matrix, ascending; takes the real-symmetric
/// fast path when the matrix has no imaginary parts.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if matrix_is_real(m, 0.0) {
        let re = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re);
        Ok(eigh_real(&re)?.0)
    } else {
        Ok(eigh_complex(m)?.0)
    }
}

pub(crate) fn max_nonhermiticity(m: &DMatrix<Complex64>) -> f64 {
    let mut max_dev: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..=j {
            let dev = (m[(i, j)] - m[(j, i)].conj()).norm();
            if dev > max_dev {
                max_dev = dev;
            }
        }
    }
    max_dev
}

pub(crate) fn matrix_is_real(m: &DMatrix<Complex64>, tol: f64) -> bool {
    m.iter().all(|z| z.im.abs() <= tol)
}
