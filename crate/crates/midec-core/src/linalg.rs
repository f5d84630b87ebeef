//! Small dense symmetric-matrix helpers on top of nalgebra.
//!
//! Everything here is desk scale (d of a few), so we always go through a
//! full symmetric eigendecomposition. Inversions apply an eigenvalue floor
//! of `1e-12 · λ_max` so near-degenerate inputs stay stable.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Relative eigenvalue floor applied before inverting a PSD matrix.
pub const EIG_FLOOR_REL: f64 = 1e-12;

/// Eigendecomposition of the symmetrized part of `m`.
pub fn sym_eig(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    (eig.eigenvectors, eig.eigenvalues)
}

/// Largest eigenvalue of the symmetrized part of `m`.
pub fn sym_eig_max(m: &DMatrix<f64>) -> f64 {
    let (_, vals) = sym_eig(m);
    vals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn spectral_map(m: &DMatrix<f64>, f: impl Fn(f64, f64) -> f64) -> DMatrix<f64> {
    let (v, vals) = sym_eig(m);
    let lmax = vals.iter().copied().fold(0.0_f64, f64::max);
    let mapped = DVector::from_iterator(vals.len(), vals.iter().map(|&l| f(l, lmax)));
    &v * DMatrix::from_diagonal(&mapped) * v.transpose()
}

/// Inverse with eigenvalue floor `1e-12·λ_max` (identity-scale floor when the
/// matrix is exactly zero).
pub fn inv_floored(m: &DMatrix<f64>) -> DMatrix<f64> {
    spectral_map(m, |l, lmax| {
        let floor = (EIG_FLOOR_REL * lmax).max(f64::MIN_POSITIVE);
        1.0 / l.max(floor)
    })
}

/// Symmetric PSD square root (negative round-off eigenvalues clamped to 0).
pub fn sqrt_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    spectral_map(m, |l, _| l.max(0.0).sqrt())
}

/// Symmetric inverse square root with the same floor as [`inv_floored`].
pub fn inv_sqrt_floored(m: &DMatrix<f64>) -> DMatrix<f64> {
    spectral_map(m, |l, lmax| {
        let floor = (EIG_FLOOR_REL * lmax).max(f64::MIN_POSITIVE);
        1.0 / l.max(floor).sqrt()
    })
}

/// log det of a symmetric matrix; `-inf` when any eigenvalue is ≤ 0.
pub fn log_det_sym(m: &DMatrix<f64>) -> f64 {
    let (_, vals) = sym_eig(m);
    vals.iter().map(|&l| if l > 0.0 { l.ln() } else { f64::NEG_INFINITY }).sum()
}

/// Largest singular value.
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.iter().all(|&x| x == 0.0) {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0_f64, f64::max)
}

/// Checks `smallest eigenvalue ≥ −1e-10 · largest` on the symmetrized part.
pub fn check_psd(m: &DMatrix<f64>, what: &str) -> Result<()> {
    let (_, vals) = sym_eig(m);
    let lmax = vals.iter().copied().fold(0.0_f64, f64::max);
    let lmin = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if lmin < -1e-10 * lmax.max(f64::MIN_POSITIVE) {
        return Err(Error::input(alloc::format!(
            "{what} is not positive semi-definite (eigenvalues in [{lmin:e}, {lmax:e}])"
        )));
    }
    Ok(())
}

/// Checks elementwise symmetry within 1e-12 (relative to the largest entry).
pub fn check_symmetric(m: &DMatrix<f64>, what: &str) -> Result<()> {
    let scale = m.iter().fold(1.0_f64, |a, &x| a.max(x.abs()));
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::input(alloc::format!(
                    "{what} is not symmetric at ({i},{j})"
                )));
            }
        }
    }
    Ok(())
}

/// Eigenvalues of the symmetrized part, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let (_, vals) = sym_eig(m);
    let mut v: Vec<f64> = vals.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).expect("nonfinite eigenvalue"));
    v
}
