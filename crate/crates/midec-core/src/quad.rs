//! Numerical integration: adaptive Simpson on an interval and Gauss–Hermite
//! nodes for integrals against a Gaussian weight.

use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Partial sums beyond this magnitude are reported as divergent.
pub const DIVERGENCE_CAP: f64 = 1e12;

const MAX_DEPTH: u32 = 48;
/// The interval is pre-split into this many panels before adaptive refinement
/// so narrow density bumps inside a wide domain are not missed.
const INITIAL_PANELS: usize = 64;

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    (fa + 4.0 * fm + fb) * h / 6.0
}

#[allow(clippy::too_many_arguments)]
fn adapt(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !(flm.is_finite() && frm.is_finite()) {
        return f64::INFINITY;
    }
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    let l = adapt(f, a, m, fa, flm, fm, left, tol * 0.5, depth + 1);
    if !l.is_finite() || l.abs() > DIVERGENCE_CAP {
        return f64::INFINITY;
    }
    l + adapt(f, m, b, fm, frm, fb, right, tol * 0.5, depth + 1)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` with absolute tolerance
/// `tol`.
///
/// Returns `+inf` when the running value exceeds [`DIVERGENCE_CAP`] or the
/// integrand is nonfinite, signalling a genuinely divergent integral rather
/// than producing NaN.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::domain("integration domain must be a finite interval [a, b], a < b"));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let mut total = 0.0;
    let panel_tol = tol / INITIAL_PANELS as f64;
    let w = (b - a) / INITIAL_PANELS as f64;
    for i in 0..INITIAL_PANELS {
        let pa = a + i as f64 * w;
        let pb = pa + w;
        let pm = 0.5 * (pa + pb);
        let (fa, fm, fb) = (f(pa), f(pm), f(pb));
        if !(fa.is_finite() && fm.is_finite() && fb.is_finite()) {
            return Ok(f64::INFINITY);
        }
        let whole = simpson(fa, fm, fb, w);
        total += adapt(f, pa, pb, fa, fm, fb, whole, panel_tol, 0);
        if !total.is_finite() || total.abs() > DIVERGENCE_CAP {
            return Ok(f64::INFINITY);
        }
    }
    Ok(total)
}

/// Gauss–Hermite nodes and weights (physicists' convention): the rule
/// satisfies `Σ wᵢ g(xᵢ) ≈ ∫ g(x)·e^{−x²} dx`, with `Σ wᵢ = √π`.
///
/// Computed by the Golub–Welsch eigenvalue method on the Jacobi matrix of the
/// Hermite three-term recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut j = DMatrix::zeros(n, n);
    for i in 1..n {
        let b = (i as f64 / 2.0).sqrt();
        j[(i - 1, i)] = b;
        j[(i, i - 1)] = b;
    }
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let first = eig.eigenvectors[(0, i)];
            (node, core::f64::consts::PI.sqrt() * first * first)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("nonfinite GH node"));
    pairs.into_iter().unzip()
}

/// Expectation `E[g(X)]` for `X ~ N(mean, var)` using an `n`-node
/// Gauss–Hermite rule.
pub fn gauss_hermite_expect(
    mean: f64,
    var: f64,
    n: usize,
    g: &dyn Fn(f64) -> f64,
) -> f64 {
    let (nodes, weights) = gauss_hermite(n);
    let scale = (2.0 * var).sqrt();
    let norm = core::f64::consts::PI.sqrt();
    nodes
        .iter()
        .zip(weights.iter())
        .map(|(&t, &w)| w * g(mean + scale * t))
        .sum::<f64>()
        / norm
}
