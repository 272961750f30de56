//! Small shared helpers over `nalgebra` dense matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Maximum absolute deviation from symmetry.
pub(crate) fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Symmetric eigendecomposition with eigenvalues sorted descending and the
/// eigenvector columns permuted accordingly.
pub(crate) fn sym_eig_sorted(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = symmetrize(m).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Sorted (descending) eigenvalues of a symmetric matrix.
pub(crate) fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut vals: Vec<f64> = symmetrize(m).symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    vals
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetrize(m)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |acc, &x| acc.min(x))
}

pub(crate) fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetrize(m)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &x| acc.max(x))
}

/// `m^{1/2}` for a symmetric positive semidefinite matrix; small negative
/// eigenvalues from rounding are clamped to zero.
pub(crate) fn sqrt_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (vals, vecs) = sym_eig_sorted(m);
    let d = DVector::from_iterator(vals.len(), vals.iter().map(|&v| v.max(0.0).sqrt()));
    &vecs * DMatrix::from_diagonal(&d) * vecs.transpose()
}

/// `m^{-1/2}` for a symmetric positive definite matrix.
pub(crate) fn inv_sqrt_pd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (vals, vecs) = sym_eig_sorted(m);
    let min = *vals.last().unwrap();
    let max = vals[0];
    if min <= 0.0 || min <= max * 1e-14 {
        return Err(Error::NotPositiveDefinite { min_eig: min });
    }
    let d = DVector::from_iterator(vals.len(), vals.iter().map(|&v| 1.0 / v.sqrt()));
    Ok(&vecs * DMatrix::from_diagonal(&d) * vecs.transpose())
}

/// Extract the principal submatrix on `rows x rows`.
pub(crate) fn principal_submatrix(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows.len(), |i, j| m[(rows[i], rows[j])])
}

/// Extract the rectangular block `rows x cols`.
pub(crate) fn block(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}
