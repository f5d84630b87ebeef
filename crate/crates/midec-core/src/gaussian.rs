//! Exact closed-form joint laws and mutual information for the three chains
//! on Gaussian targets. These are the ground truth that the samplers,
//! estimators and bounds are verified against.
//!
//! Conventions: the target is N(0, (1/α)·I); the initialization is isotropic
//! N(m₀, c₀²·I). All chains then keep the joint law of (X₀, X_k) Gaussian
//! with isotropic blocks, so the d-dimensional law is d independent copies
//! of the scalar one.
//!
//! Infinite mutual information (k = 0: MI of a continuous variable with
//! itself) is represented as `f64::INFINITY`, never NaN, so it survives
//! serialization as a tagged value.

use alloc::format;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg;
use crate::targets::GaussianDist;

/// The joint Gaussian law of (X₀, X_k): block means, covariances and the
/// cross-covariance Cov(X₀, X_k).
#[derive(Debug, Clone)]
pub struct JointGaussianState {
    pub d: usize,
    pub mean0: DVector<f64>,
    pub meank: DVector<f64>,
    pub cov0: DMatrix<f64>,
    pub covk: DMatrix<f64>,
    pub cross: DMatrix<f64>,
}

impl JointGaussianState {
    /// Validates block shapes and positive semi-definiteness of the full
    /// (2d)×(2d) covariance [[cov0, cross], [crossᵀ, covk]].
    pub fn new(
        mean0: DVector<f64>,
        meank: DVector<f64>,
        cov0: DMatrix<f64>,
        covk: DMatrix<f64>,
        cross: DMatrix<f64>,
    ) -> Result<Self> {
        let d = mean0.len();
        if meank.len() != d {
            return Err(Error::input("mean block lengths differ"));
        }
        for (m, name) in [(&cov0, "cov0"), (&covk, "covk"), (&cross, "cross")] {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::input(format!("{name} block is not {d}x{d}")));
            }
        }
        linalg::check_symmetric(&cov0, "cov0")?;
        linalg::check_symmetric(&covk, "covk")?;
        let joint = Self { d, mean0, meank, cov0, covk, cross };
        linalg::check_psd(&joint.full_cov(), "joint covariance")?;
        Ok(joint)
    }

    /// 1-d convenience constructor.
    pub fn scalar(m0: f64, v0: f64, mk: f64, vk: f64, cross: f64) -> Result<Self> {
        Self::new(
            DVector::from_element(1, m0),
            DVector::from_element(1, mk),
            DMatrix::from_element(1, 1, v0),
            DMatrix::from_element(1, 1, vk),
            DMatrix::from_element(1, 1, cross),
        )
    }

    /// Assembles the full (2d)×(2d) covariance matrix.
    pub fn full_cov(&self) -> DMatrix<f64> {
        let d = self.d;
        let mut full = DMatrix::zeros(2 * d, 2 * d);
        full.view_mut((0, 0), (d, d)).copy_from(&self.cov0);
        full.view_mut((0, d), (d, d)).copy_from(&self.cross);
        full.view_mut((d, 0), (d, d)).copy_from(&self.cross.transpose());
        full.view_mut((d, d), (d, d)).copy_from(&self.covk);
        full
    }

    /// Swaps the X₀ and X_k blocks.
    pub fn swapped(&self) -> Self {
        Self {
            d: self.d,
            mean0: self.meank.clone(),
            meank: self.mean0.clone(),
            cov0: self.covk.clone(),
            covk: self.cov0.clone(),
            cross: self.cross.transpose(),
        }
    }
}

/// τ_α(t) = (1 − e^{−2αt})/α, the stationary-noise variance accumulated by
/// the OU process over time t.
pub fn ou_noise_variance(alpha: f64, t: f64) -> f64 {
    (-(-2.0 * alpha * t).exp_m1()) / alpha
}

fn require_isotropic(init: &GaussianDist) -> Result<f64> {
    init.isotropic_variance()
        .ok_or_else(|| Error::input("initialization must have isotropic covariance c²·I"))
}

/// Joint law of (X₀, X_t) for the OU process dX = −αX dt + √2 dW with target
/// N(0, (1/α)I), started from isotropic N(m₀, c₀²I):
/// X_t = e^{−αt}X₀ + √τ_α(t)·Z.
pub fn ou_joint(alpha: f64, init: &GaussianDist, t: f64) -> Result<JointGaussianState> {
    if !(alpha > 0.0) {
        return Err(Error::domain("alpha must be > 0"));
    }
    if !(t >= 0.0) {
        return Err(Error::domain("time must be ≥ 0"));
    }
    let c0sq = require_isotropic(init)?;
    let d = init.dim();
    let decay = (-alpha * t).exp();
    let vk = decay * decay * c0sq + ou_noise_variance(alpha, t);
    JointGaussianState::new(
        init.mean().clone(),
        init.mean() * decay,
        init.cov().clone(),
        DMatrix::identity(d, d) * vk,
        DMatrix::identity(d, d) * (decay * c0sq),
    )
}

/// Exact MI(X₀; X_t) for the OU process started from N(0, I):
/// (d/2)·log(1 + α/(e^{2αt} − 1)). Infinite at t = 0.
pub fn ou_mi_exact(alpha: f64, t: f64, d: usize) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::domain("alpha must be > 0"));
    }
    if !(t >= 0.0) {
        return Err(Error::domain("time must be ≥ 0"));
    }
    if t == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(0.5 * d as f64 * (1.0 + alpha / (2.0 * alpha * t).exp_m1()).ln())
}

/// MI bounds for the OU process from a general initialization with
/// Cov(ρ₀) ⪯ J·I and entropy H₀:
/// lower = (d/2)·log(α·e^{2H₀/d}/(2πe·(e^{2αt}−1)) + 1),
/// upper = (d/2)·log(1 + αJ/(e^{2αt}−1)).
/// For Gaussian N(0, I) initialization (J = 1, H₀ = (d/2)log 2πe) the two
/// coincide with [`ou_mi_exact`].
pub fn ou_mi_bounds(alpha: f64, t: f64, d: usize, j: f64, h0: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && t > 0.0 && j >= 0.0) {
        return Err(Error::domain("need alpha > 0, t > 0, J ≥ 0"));
    }
    let df = d as f64;
    let denom = (2.0 * alpha * t).exp_m1();
    let two_pi_e = 2.0 * core::f64::consts::PI * core::f64::consts::E;
    let lower = 0.5 * df * (alpha * (2.0 * h0 / df).exp() / (two_pi_e * denom) + 1.0).ln();
    let upper = 0.5 * df * (1.0 + alpha * j / denom).ln();
    Ok((lower, upper))
}

/// MI bounds along the heat flow X_t = X₀ + √(2t)·Z:
/// upper = ½·Σᵢ log(λᵢ/(2t) + 1) over initial covariance eigenvalues λᵢ,
/// lower = (d/2)·log(e^{2H₀/d}/(4πe·t) + 1) via the entropy power
/// inequality.
pub fn heat_flow_mi_bounds(t: f64, cov0_eigenvalues: &[f64], h0: f64, d: usize) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::domain("time must be > 0"));
    }
    let df = d as f64;
    let upper: f64 = cov0_eigenvalues
        .iter()
        .map(|&l| 0.5 * (l / (2.0 * t) + 1.0).ln())
        .sum();
    let four_pi_e = 4.0 * core::f64::consts::PI * core::f64::consts::E;
    let lower = 0.5 * df * ((2.0 * h0 / df).exp() / (four_pi_e * t) + 1.0).ln();
    Ok((lower, upper))
}

fn check_ula_params(alpha: f64, eta: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::domain("alpha must be > 0"));
    }
    if !(eta > 0.0 && eta < 2.0 / alpha) {
        return Err(Error::domain("ULA recursion needs 0 < eta < 2/alpha"));
    }
    Ok(1.0 - eta * alpha)
}

/// ULA noise variance after k steps on the target N(0, (1/α)I):
/// s_k² = 2(1 − γ^{2k})/(α(2 − ηα)) with γ = 1 − ηα.
pub fn ula_noise_variance(alpha: f64, eta: f64, k: u64) -> Result<f64> {
    let gamma = check_ula_params(alpha, eta)?;
    Ok(2.0 * (1.0 - gamma.powi(2 * k as i32)) / (alpha * (2.0 - eta * alpha)))
}

/// Joint law of (X₀, X_k) for ULA on N(0, (1/α)I), isotropic init:
/// X_k = γ^k X₀ + s_k·Z.
pub fn ula_gaussian_joint(
    alpha: f64,
    eta: f64,
    k: u64,
    init: &GaussianDist,
) -> Result<JointGaussianState> {
    let gamma = check_ula_params(alpha, eta)?;
    let c0sq = require_isotropic(init)?;
    let d = init.dim();
    let gk = gamma.powi(k as i32);
    let vk = gk * gk * c0sq + ula_noise_variance(alpha, eta, k)?;
    JointGaussianState::new(
        init.mean().clone(),
        init.mean() * gk,
        init.cov().clone(),
        DMatrix::identity(d, d) * vk,
        DMatrix::identity(d, d) * (gk * c0sq),
    )
}

/// Exact MI(X₀; X_k) for ULA on N(0, (1/α)I) started from N(0, I):
/// (d/2)·log[1 + γ^{2k}(2α − ηα²)/(2(1 − γ^{2k}))]. Infinite at k = 0.
pub fn ula_gaussian_mi_exact(alpha: f64, eta: f64, k: u64, d: usize) -> Result<f64> {
    let gamma = check_ula_params(alpha, eta)?;
    if k == 0 {
        return Ok(f64::INFINITY);
    }
    let g2k = gamma.powi(2 * k as i32);
    let ratio = g2k * (2.0 * alpha - eta * alpha * alpha) / (2.0 * (1.0 - g2k));
    Ok(0.5 * d as f64 * (1.0 + ratio).ln())
}

fn check_proximal_params(alpha: f64, eta: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::domain("alpha must be > 0"));
    }
    if !(eta > 0.0) {
        return Err(Error::domain("eta must be > 0"));
    }
    Ok(1.0 + alpha * eta)
}

/// Joint law of (X₀, X_k) for the proximal sampler on N(0, (1/α)I) with
/// isotropic init: m_k = m₀/(1+αη)^k, c_k² − 1/α = (c₀² − 1/α)/(1+αη)^{2k},
/// cross = c₀²/(1+αη)^k (the conditional mean of X_k | X₀ = x contracts by
/// (1+αη)^{−k}).
pub fn proximal_gaussian_joint(
    alpha: f64,
    eta: f64,
    k: u64,
    init: &GaussianDist,
) -> Result<JointGaussianState> {
    let r = check_proximal_params(alpha, eta)?;
    let c0sq = require_isotropic(init)?;
    let d = init.dim();
    let rk = r.powi(k as i32);
    let ck_sq = 1.0 / alpha + (c0sq - 1.0 / alpha) / (rk * rk);
    JointGaussianState::new(
        init.mean().clone(),
        init.mean() / rk,
        init.cov().clone(),
        DMatrix::identity(d, d) * ck_sq,
        DMatrix::identity(d, d) * (c0sq / rk),
    )
}

/// Exact MI(X₀; X_k) for the proximal sampler on N(0, (1/α)I) started from
/// N(0, I): (d/2)·log[1 + α/((1+αη)^{2k} − 1)]. Infinite at k = 0.
pub fn proximal_gaussian_mi_exact(alpha: f64, eta: f64, k: u64, d: usize) -> Result<f64> {
    let r = check_proximal_params(alpha, eta)?;
    if k == 0 {
        return Ok(f64::INFINITY);
    }
    let r2k = r.powi(2 * k as i32);
    Ok(0.5 * d as f64 * (1.0 + alpha / (r2k - 1.0)).ln())
}

/// Differential entropy of N(·, cov): (d/2)·log(2πe) + ½·log det cov.
/// Singular covariance yields `-inf`.
pub fn gaussian_entropy(cov: &DMatrix<f64>) -> f64 {
    let d = cov.nrows() as f64;
    let two_pi_e = 2.0 * core::f64::consts::PI * core::f64::consts::E;
    0.5 * d * two_pi_e.ln() + 0.5 * linalg::log_det_sym(cov)
}

/// Entropy power Λ(ρ) = e^{2H/d}/(2πe) of a d-dimensional law with entropy H.
pub fn entropy_power(h: f64, d: usize) -> f64 {
    let two_pi_e = 2.0 * core::f64::consts::PI * core::f64::consts::E;
    (2.0 * h / d as f64).exp() / two_pi_e
}

/// KL(N(m_μ, Σ_μ) ∥ N(m_ν, Σ_ν)) in closed form.
pub fn gaussian_kl(mu: &GaussianDist, nu: &GaussianDist) -> Result<f64> {
    if mu.dim() != nu.dim() {
        return Err(Error::input("dimension mismatch"));
    }
    let d = mu.dim() as f64;
    let prec_nu = linalg::inv_floored(nu.cov());
    let dm = nu.mean() - mu.mean();
    let trace = (&prec_nu * mu.cov()).trace();
    let quad = (&prec_nu * &dm).dot(&dm);
    let logdet = linalg::log_det_sym(nu.cov()) - linalg::log_det_sym(mu.cov());
    Ok(0.5 * (trace + quad - d + logdet))
}

/// Squared 2-Wasserstein distance between Gaussians with commuting
/// covariances (sufficient for the isotropic uses here):
/// ‖Δm‖² + ‖Σ_μ^{1/2} − Σ_ν^{1/2}‖_F².
pub fn gaussian_w2_squared(mu: &GaussianDist, nu: &GaussianDist) -> Result<f64> {
    if mu.dim() != nu.dim() {
        return Err(Error::input("dimension mismatch"));
    }
    let dm = mu.mean() - nu.mean();
    let s1 = linalg::sqrt_psd(mu.cov());
    let s2 = linalg::sqrt_psd(nu.cov());
    let comm = (mu.cov() * nu.cov() - nu.cov() * mu.cov()).abs().max();
    if comm > 1e-10 * (1.0 + linalg::sym_eig_max(mu.cov()).abs()) {
        return Err(Error::capability("W2 implemented only for commuting covariances"));
    }
    Ok(dm.norm_squared() + (s1 - s2).norm_squared())
}
