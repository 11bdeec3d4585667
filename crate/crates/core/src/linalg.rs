//! Thin helpers over nalgebra's dense decompositions.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

const SVD_MAX_ITER: usize = 10_000;

/// Singular values and right singular vectors (as columns) of a matrix with
/// at least as many rows as columns, unsorted. nalgebra's SVD can stall on
/// some inputs, so iterations are bounded, the transpose is tried next, and
/// the symmetric eigenproblem of `m^T m` is the last resort.
fn right_svd(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    if let Some(svd) = m.clone().try_svd(false, true, f64::EPSILON, SVD_MAX_ITER) {
        return (svd.singular_values, svd.v_t.expect("right singular vectors requested").transpose());
    }
    if let Some(svd) = m.transpose().try_svd(true, false, f64::EPSILON, SVD_MAX_ITER) {
        return (svd.singular_values, svd.u.expect("left singular vectors requested"));
    }
    let eigen = (m.transpose() * m).symmetric_eigen();
    (eigen.eigenvalues.map(|x| x.max(0.0).sqrt()), eigen.eigenvectors)
}

/// Singular values (descending) and the matching right singular vectors of a
/// square-padded copy of `m`, so the full null space of wide matrices is
/// available.
pub(crate) fn full_svd(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let (sigma, v_cols) = right_svd(&padded);
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    let values = order.iter().map(|&i| sigma[i]).collect();
    let mut v = DMatrix::zeros(cols, order.len());
    for (dst, &src) in order.iter().enumerate() {
        v.set_column(dst, &v_cols.column(src));
    }
    (values, v)
}

/// Singular values, descending. Wide matrices are transposed first.
pub(crate) fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let tall = if m.nrows() < m.ncols() { m.transpose() } else { m.clone() };
    let s = match tall.clone().try_svd(false, false, f64::EPSILON, SVD_MAX_ITER) {
        Some(svd) => svd.singular_values,
        None => right_svd(&tall).0,
    };
    let mut s: Vec<f64> = s.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with a threshold relative to the largest singular value.
pub(crate) fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&max) if max > 0.0 => s.iter().filter(|&&x| x > rel_tol * max).count(),
        _ => 0,
    }
}

/// Orthonormal basis of the right null space, one vector per column, with a
/// sign convention that makes the largest-magnitude entry positive.
pub(crate) fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> Vec<DVector<f64>> {
    let cols = m.ncols();
    if cols == 0 {
        return Vec::new();
    }
    if m.nrows() == 0 {
        return (0..cols).map(|i| DVector::from_fn(cols, |j, _| if i == j { 1.0 } else { 0.0 })).collect();
    }
    let (s, v) = full_svd(m);
    let max = s.first().copied().unwrap_or(0.0);
    let mut basis = Vec::new();
    for (i, &sigma) in s.iter().enumerate() {
        if sigma <= rel_tol * max {
            basis.push(canonical_sign(v.column(i).into_owned()));
        }
    }
    basis
}

pub(crate) fn canonical_sign(mut v: DVector<f64>) -> DVector<f64> {
    let pivot = v.iter().copied().fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
    if pivot < 0.0 {
        v.neg_mut();
    }
    v
}

/// Relative residual of `v` after removing its projection onto the row space
/// of `rows` (each row one vector).
pub(crate) fn span_residual(rows: &DMatrix<f64>, v: &DVector<f64>, rel_tol: f64) -> f64 {
    let norm = v.norm();
    if norm == 0.0 {
        return 0.0;
    }
    if rows.nrows() == 0 {
        return 1.0;
    }
    let (sigma, basis) = full_svd(rows);
    let max = sigma.first().copied().unwrap_or(0.0);
    let mut residual = v.clone();
    for (i, &s) in sigma.iter().enumerate() {
        if s > rel_tol * max {
            let ui = basis.column(i);
            let c = ui.dot(v);
            residual.axpy(-c, &ui, 1.0);
        }
    }
    residual.norm() / norm
}

/// A square matrix checked for invertibility once and reused for solves.
#[derive(Debug, Clone)]
pub(crate) struct CheckedInverse {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl CheckedInverse {
    pub(crate) fn new(m: &DMatrix<f64>, rel_tol: f64) -> Result<Self> {
        let s = singular_values(m);
        let largest = s.first().copied().unwrap_or(0.0);
        let smallest = s.last().copied().unwrap_or(0.0);
        if !m.is_empty() && (largest == 0.0 || smallest <= rel_tol * largest) {
            return Err(Error::GaugeNotFixed { smallest, largest });
        }
        Ok(Self { lu: m.clone().lu() })
    }

    pub(crate) fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        if rhs.is_empty() {
            return rhs.clone();
        }
        self.lu.solve(rhs).expect("matrix checked invertible")
    }
}
