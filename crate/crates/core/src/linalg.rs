//! Small dense matrix helpers on row-major `d*d` slices, backed by nalgebra.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

fn to_matrix(m: &[f64], d: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(d, d, m)
}

fn to_row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Eigenvalues of the symmetric part of `m`, ascending.
pub fn symmetric_eigenvalues(m: &[f64], d: usize) -> Vec<f64> {
    let a = to_matrix(m, d);
    let sym = (&a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Operator 2-norm (largest singular value).
pub fn spectral_norm(m: &[f64], d: usize) -> f64 {
    let a = to_matrix(m, d);
    a.singular_values().iter().copied().fold(0.0, f64::max)
}

pub fn inverse(m: &[f64], d: usize) -> Option<Vec<f64>> {
    to_matrix(m, d).try_inverse().map(|inv| to_row_major(&inv))
}

pub fn determinant(m: &[f64], d: usize) -> f64 {
    to_matrix(m, d).determinant()
}

/// Solve `m x = b`.
pub fn solve(m: &[f64], d: usize, b: &[f64]) -> Option<Vec<f64>> {
    let lu = to_matrix(m, d).lu();
    lu.solve(&DVector::from_column_slice(b)).map(|x| x.iter().copied().collect())
}

/// `a * b` for row-major `d*d` matrices.
pub fn mat_mul(a: &[f64], b: &[f64], d: usize, out: &mut [f64]) {
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = (0..d).map(|k| a[i * d + k] * b[k * d + j]).sum();
        }
    }
}

/// `a * a^T`.
pub fn gram(a: &[f64], d: usize, out: &mut [f64]) {
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = (0..d).map(|k| a[i * d + k] * a[j * d + k]).sum();
        }
    }
}

/// Cholesky factor data for an SPD matrix: inverse and determinant.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    pub inverse: Vec<f64>,
    pub determinant: f64,
}

pub fn spd_factor(m: &[f64], d: usize) -> Option<SpdFactor> {
    let a = to_matrix(m, d);
    if (&a - a.transpose()).abs().max() > 1e-12 * (1.0 + a.abs().max()) {
        return None;
    }
    let chol = a.cholesky()?;
    let diag_prod: f64 = (0..d).map(|i| chol.l_dirty()[(i, i)]).product();
    Some(SpdFactor { inverse: to_row_major(&chol.inverse()), determinant: diag_prod * diag_prod })
}
