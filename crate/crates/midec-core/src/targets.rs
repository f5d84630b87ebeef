//! Target distributions: Gaussians and generic potentials `ν ∝ exp(−f)`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg;

/// A Gaussian distribution N(mean, covariance).
///
/// The covariance must be symmetric (within 1e-12 elementwise) and positive
/// semi-definite (smallest eigenvalue ≥ −1e-10·largest). The spectral
/// factorization is computed once at construction and reused for sampling,
/// inversion and potentials.
#[derive(Debug, Clone)]
pub struct GaussianDist {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    eig_vectors: DMatrix<f64>,
    eig_values: DVector<f64>, // clamped to ≥ 0
}

impl GaussianDist {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::input("covariance shape does not match mean length"));
        }
        if mean.iter().any(|x| !x.is_finite()) || cov.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("nonfinite entries in Gaussian parameters"));
        }
        linalg::check_symmetric(&cov, "covariance")?;
        linalg::check_psd(&cov, "covariance")?;
        let (eig_vectors, raw) = linalg::sym_eig(&cov);
        let eig_values = raw.map(|l| l.max(0.0));
        Ok(Self { mean, cov, eig_vectors, eig_values })
    }

    /// N(0, I_d).
    pub fn standard(d: usize) -> Self {
        Self::isotropic(DVector::zeros(d), 1.0).expect("identity covariance is valid")
    }

    /// N(mean, var·I).
    pub fn isotropic(mean: DVector<f64>, var: f64) -> Result<Self> {
        let d = mean.len();
        Self::new(mean, DMatrix::identity(d, d) * var)
    }

    /// 1-d N(m, v).
    pub fn scalar(m: f64, v: f64) -> Result<Self> {
        Self::new(DVector::from_element(1, m), DMatrix::from_element(1, 1, v))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Covariance eigenvalues, clamped to ≥ 0 (unsorted, matching
    /// eigenvector columns).
    pub fn cov_eigenvalues(&self) -> &DVector<f64> {
        &self.eig_values
    }

    pub fn cov_max_eigenvalue(&self) -> f64 {
        self.eig_values.iter().copied().fold(0.0, f64::max)
    }

    pub fn cov_min_eigenvalue(&self) -> f64 {
        self.eig_values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Is the covariance c²·I within 1e-12·c²? Returns the common variance.
    pub fn isotropic_variance(&self) -> Option<f64> {
        let d = self.dim();
        let c2 = self.cov[(0, 0)];
        let tol = 1e-12 * c2.abs().max(1.0);
        for i in 0..d {
            for j in 0..d {
                let want = if i == j { c2 } else { 0.0 };
                if (self.cov[(i, j)] - want).abs() > tol {
                    return None;
                }
            }
        }
        Some(c2)
    }

    /// Total variance E‖X − EX‖² = trace of the covariance.
    pub fn total_variance(&self) -> f64 {
        self.cov.trace()
    }

    /// Draws one sample as mean + V·diag(√λ)·z.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let d = self.dim();
        let z = DVector::from_iterator(
            d,
            (0..d).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)),
        );
        let scaled = DVector::from_iterator(
            d,
            self.eig_values.iter().zip(z.iter()).map(|(&l, &zi)| l.sqrt() * zi),
        );
        &self.mean + &self.eig_vectors * scaled
    }

    /// Density at `x` (1-d only; used by quadrature paths).
    pub fn density_1d(&self, x: f64) -> f64 {
        debug_assert_eq!(self.dim(), 1);
        let v = self.cov[(0, 0)];
        let dm = x - self.mean[0];
        (-dm * dm / (2.0 * v)).exp() / (2.0 * core::f64::consts::PI * v).sqrt()
    }
}

type ScalarFn = dyn Fn(&DVector<f64>) -> f64 + Send + Sync;
type VectorFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;

/// A target ν ∝ exp(−f) described by oracles for f and ∇f, together with a
/// strong-convexity modulus `alpha ≥ 0` and (optionally) a smoothness bound
/// `L ≥ alpha` on the Hessian.
#[derive(Clone)]
pub struct Potential {
    dim: usize,
    value: Arc<ScalarFn>,
    grad: Arc<VectorFn>,
    alpha: f64,
    smoothness: Option<f64>,
}

impl core::fmt::Debug for Potential {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Potential")
            .field("dim", &self.dim)
            .field("alpha", &self.alpha)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl Potential {
    pub fn new(
        dim: usize,
        value: Arc<ScalarFn>,
        grad: Arc<VectorFn>,
        alpha: f64,
        smoothness: Option<f64>,
    ) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::domain("alpha must be ≥ 0"));
        }
        if let Some(l) = smoothness {
            if !(l >= alpha) {
                return Err(Error::domain("smoothness must be ≥ alpha"));
            }
        }
        Ok(Self { dim, value, grad, alpha, smoothness })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        (self.value)(x)
    }

    pub fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.grad)(x)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn smoothness(&self) -> Option<f64> {
        self.smoothness
    }
}

/// Potential of a Gaussian target: f(x) = ½(x−m)ᵀΣ⁻¹(x−m).
///
/// `alpha = 1/λ_max(Σ)`, `smoothness = 1/λ_min(Σ)`. Rejected when the
/// covariance condition number exceeds 1e12.
pub fn gaussian_potential(g: &GaussianDist) -> Result<Potential> {
    let lmax = g.cov_max_eigenvalue();
    let lmin = g.cov_min_eigenvalue();
    if !(lmin > 0.0) || lmax / lmin > 1e12 {
        return Err(Error::input(format!(
            "covariance is singular or too ill-conditioned (λ in [{lmin:e}, {lmax:e}])"
        )));
    }
    let prec = linalg::inv_floored(g.cov());
    let mean = g.mean().clone();
    let prec_v = prec.clone();
    let mean_v = mean.clone();
    let value = move |x: &DVector<f64>| {
        let d = x - &mean_v;
        0.5 * (&prec_v * &d).dot(&d)
    };
    let grad = move |x: &DVector<f64>| &prec * (x - &mean);
    Potential::new(g.dim(), Arc::new(value), Arc::new(grad), 1.0 / lmax, Some(1.0 / lmin))
}

/// One flagged probe from [`validate_potential`].
#[derive(Debug, Clone)]
pub struct CurvatureFlag {
    /// Index into the probe list.
    pub probe: usize,
    /// Direction index: 0..d are coordinate axes, d is the diagonal direction.
    pub direction: usize,
    /// Second-difference curvature estimate along that direction.
    pub curvature: f64,
    pub reason: String,
}

/// Report from [`validate_potential`]: finite-difference gradient agreement
/// and directional curvature vs the declared (alpha, smoothness) window.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    /// Max over probes/coordinates of |∂f/∂xᵢ (central diff) − ∇f(x)ᵢ|.
    pub max_grad_error: f64,
    pub curvature_flags: Vec<CurvatureFlag>,
}

impl ValidationReport {
    pub fn ok(&self, grad_tol: f64) -> bool {
        self.max_grad_error <= grad_tol && self.curvature_flags.is_empty()
    }
}

/// Central finite differences use step `1e-4·(1+|xᵢ|)`, balancing truncation
/// against round-off at double precision.
fn fd_step(x: f64) -> f64 {
    1e-4 * (1.0 + x.abs())
}

/// Report-only check that a potential's oracles are mutually consistent and
/// that its curvature stays inside the declared [alpha, smoothness] window
/// (with 1e-3 slack) along coordinate axes and the diagonal direction.
pub fn validate_potential(p: &Potential, probes: &[DVector<f64>]) -> ValidationReport {
    let d = p.dim();
    let mut report = ValidationReport::default();
    for (pi, x) in probes.iter().enumerate() {
        let g = p.grad(x);
        // Gradient vs central difference, per coordinate.
        for i in 0..d {
            let h = fd_step(x[i]);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (p.value(&xp) - p.value(&xm)) / (2.0 * h);
            let err = (fd - g[i]).abs();
            if err > report.max_grad_error {
                report.max_grad_error = err;
            }
        }
        // Rayleigh-quotient curvature via second central differences along
        // each axis and the normalized all-ones direction.
        let mut directions: Vec<DVector<f64>> = (0..d)
            .map(|i| {
                let mut u = DVector::zeros(d);
                u[i] = 1.0;
                u
            })
            .collect();
        directions.push(DVector::from_element(d, 1.0 / (d as f64).sqrt()));
        let f0 = p.value(x);
        for (di, u) in directions.iter().enumerate() {
            let h = fd_step(x.norm());
            let curv = (p.value(&(x + u * h)) - 2.0 * f0 + p.value(&(x - u * h))) / (h * h);
            if curv < p.alpha() - 1e-3 {
                report.curvature_flags.push(CurvatureFlag {
                    probe: pi,
                    direction: di,
                    curvature: curv,
                    reason: format!("curvature {curv:.6} below declared alpha {}", p.alpha()),
                });
            } else if let Some(l) = p.smoothness() {
                if curv > l + 1e-3 {
                    report.curvature_flags.push(CurvatureFlag {
                        probe: pi,
                        direction: di,
                        curvature: curv,
                        reason: format!("curvature {curv:.6} above declared smoothness {l}"),
                    });
                }
            }
        }
    }
    report
}

/// Registered non-Gaussian test potential: f(x) = Σᵢ [a·xᵢ²/2 + log cosh xᵢ].
///
/// Coordinatewise f″ = a + sech²(x) ∈ [a, a+1], so alpha = a and
/// smoothness = a + 1 are exact.
pub fn logcosh_potential(dim: usize, a: f64) -> Result<Potential> {
    if !(a > 0.0) {
        return Err(Error::domain("logcosh potential needs a > 0"));
    }
    let value = move |x: &DVector<f64>| {
        x.iter().map(|&xi| a * xi * xi / 2.0 + ln_cosh(xi)).sum()
    };
    let grad = move |x: &DVector<f64>| x.map(|xi| a * xi + xi.tanh());
    Potential::new(dim, Arc::new(value), Arc::new(grad), a, Some(a + 1.0))
}

/// Overflow-safe log cosh.
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (1.0 + (-2.0 * a).exp()).ln() - core::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;

    #[test]
    fn standard_normal_potential_values() {
        // f(x) = x²/2 for N(0,1): f(2) = 2, f'(2) = 2.
        let g = GaussianDist::scalar(0.0, 1.0).unwrap();
        let p = gaussian_potential(&g).unwrap();
        let x = DVector::from_element(1, 2.0);
        assert_relative_eq!(p.value(&x), 2.0, epsilon = 1e-12);
        assert_relative_eq!(p.grad(&x)[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn isotropic_alpha_and_smoothness() {
        let g = GaussianDist::isotropic(DVector::zeros(3), 0.25).unwrap();
        let p = gaussian_potential(&g).unwrap();
        assert_relative_eq!(p.alpha(), 4.0, epsilon = 1e-12);
        assert_relative_eq!(p.smoothness().unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn diagonal_covariance_alpha_from_extreme_eigenvalues() {
        let g = GaussianDist::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]),
        )
        .unwrap();
        let p = gaussian_potential(&g).unwrap();
        assert_relative_eq!(p.alpha(), 0.25, epsilon = 1e-12);
        assert_relative_eq!(p.smoothness().unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn asymmetric_covariance_rejected() {
        let r = GaussianDist::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.2, 1.0]),
        );
        assert!(r.is_err());
    }

    #[test]
    fn near_singular_covariance_rejected_for_potential() {
        let g = GaussianDist::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-14]),
        )
        .unwrap();
        assert!(gaussian_potential(&g).is_err());
    }

    #[test]
    fn validation_clean_on_exact_quadratic() {
        let g = GaussianDist::scalar(0.0, 1.0).unwrap();
        let p = gaussian_potential(&g).unwrap();
        let probes = vec![
            DVector::from_element(1, -1.0),
            DVector::from_element(1, 0.0),
            DVector::from_element(1, 1.0),
        ];
        let rep = validate_potential(&p, &probes);
        assert!(rep.max_grad_error < 1e-6, "grad error {}", rep.max_grad_error);
        assert!(rep.curvature_flags.is_empty());
    }

    #[test]
    fn validation_flags_wrong_gradient() {
        // Gradient deliberately off by a factor of 2.
        let p = Potential::new(
            1,
            Arc::new(|x: &DVector<f64>| x[0] * x[0] / 2.0),
            Arc::new(|x: &DVector<f64>| x * 2.0),
            1.0,
            Some(1.0),
        )
        .unwrap();
        let rep = validate_potential(&p, &[DVector::from_element(1, 1.0)]);
        assert!(rep.max_grad_error > 0.5);
    }

    #[test]
    fn validation_flags_quartic_with_overstated_alpha() {
        // f = x⁴/4 has zero curvature at the origin, so alpha=1 is wrong.
        let p = Potential::new(
            1,
            Arc::new(|x: &DVector<f64>| x[0].powi(4) / 4.0),
            Arc::new(|x: &DVector<f64>| x.map(|v| v.powi(3))),
            1.0,
            None,
        )
        .unwrap();
        let rep = validate_potential(&p, &[DVector::zeros(1)]);
        assert!(!rep.curvature_flags.is_empty());
        assert!(rep.curvature_flags[0].curvature < 1.0 - 1e-3);
    }

    #[test]
    fn logcosh_matches_finite_differences() {
        let p = logcosh_potential(2, 0.5).unwrap();
        let probes = vec![
            DVector::from_row_slice(&[0.3, -1.2]),
            DVector::from_row_slice(&[2.0, 0.0]),
        ];
        let rep = validate_potential(&p, &probes);
        assert!(rep.max_grad_error < 1e-6, "grad error {}", rep.max_grad_error);
        assert!(rep.curvature_flags.is_empty(), "{:?}", rep.curvature_flags);
    }
}
