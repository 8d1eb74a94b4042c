//! Dense factorizations backed by faer.
//!
//! nalgebra's implicit QR occasionally deflates too early on spin-chain
//! matrices with large, nearly degenerate diagonals and returns orthonormal
//! but inaccurate eigenpairs, so decompositions go through faer instead.
//! Every result is checked against `|| H V - V E ||`.

use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const RESIDUAL_TOL: f64 = 1e-11;

/// Eigenpairs of a real symmetric matrix, ascending.
pub(crate) struct SymmetricEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

pub(crate) fn symmetric_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let dim = m.nrows();
    let fm = Mat::<f64>::from_fn(dim, dim, |i, j| m[(i, j)]);
    let evd = fm.self_adjoint_eigen(Side::Lower).map_err(|_| Error::EigenSolver { dim })?;
    let (u, s) = (evd.U(), evd.S().column_vector());
    let values = DVector::from_fn(dim, |k, _| s[k]);
    let vectors = DMatrix::from_fn(dim, dim, |i, j| u[(i, j)]);

    let scale = m.amax().max(1.0);
    let mut residual = m * &vectors;
    for (k, mut col) in residual.column_iter_mut().enumerate() {
        col.axpy(-values[k], &vectors.column(k), 1.0);
    }
    if !(residual.amax() <= RESIDUAL_TOL * scale) {
        return Err(Error::EigenSolver { dim });
    }
    Ok(SymmetricEigen { values, vectors })
}

/// `ln |det M|` from a partially pivoted LU, or `None` when a pivot vanishes
/// exactly.
pub(crate) fn log_abs_det(m: &DMatrix<Complex64>) -> Option<f64> {
    let fm = Mat::<Complex64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let lu = fm.partial_piv_lu();
    let u = lu.U();
    let mut acc = 0.0;
    for i in 0..u.nrows() {
        let p = u[(i, i)].norm();
        if p == 0.0 {
            return None;
        }
        acc += p.ln();
    }
    Some(acc)
}
