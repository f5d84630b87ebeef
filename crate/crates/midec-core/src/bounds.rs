//! Theoretical decay bounds, contraction coefficients, Sobolev-constant
//! evolution rules and iteration-complexity formulas, as pure calculators.
//!
//! All bounds take the reference mutual information (`mi_s` / `mi_l`) as an
//! explicit input: the theorems are conditional on MI at a reference index,
//! and the harness supplies either the exact Gaussian value or a regularity
//! bound there. Products over many steps are evaluated in log space.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::phi::SobolevConstant;

fn check_nonneg(v: f64, what: &str) -> Result<()> {
    if !(v >= 0.0) {
        return Err(Error::domain(alloc::format!("{what} must be ≥ 0")));
    }
    Ok(())
}

fn check_pos(v: f64, what: &str) -> Result<()> {
    if !(v > 0.0) {
        return Err(Error::domain(alloc::format!("{what} must be > 0")));
    }
    Ok(())
}

/// Langevin MI decay from reference time s to s + dt:
/// `e^{−2α·dt}·max{1, α/α_s}·mi_s`.
pub fn bound_mi_langevin(
    alpha: f64,
    alpha_s: SobolevConstant,
    mi_s: f64,
    dt: f64,
) -> Result<f64> {
    check_pos(alpha, "alpha")?;
    check_nonneg(dt, "elapsed time")?;
    check_nonneg(mi_s, "reference MI")?;
    Ok((-2.0 * alpha * dt).exp() * (alpha / alpha_s.value()).max(1.0) * mi_s)
}

/// Sharper Langevin MI decay via the contraction coefficient:
/// `mi_s·αe^{−2α dt}/(α_s(1−e^{−2α dt}) + αe^{−2α dt})`. Never exceeds
/// [`bound_mi_langevin`].
pub fn bound_mi_langevin_sharp(
    alpha: f64,
    alpha_s: SobolevConstant,
    mi_s: f64,
    dt: f64,
) -> Result<f64> {
    check_nonneg(mi_s, "reference MI")?;
    Ok(mi_s * contraction_langevin(alpha, alpha_s.value(), dt)?)
}

/// ULA MI decay over `steps` iterations: `(1−αη)^{2·steps}·max{1, α/α_l}·mi_l`.
/// Requires αη < 1 (step-size precondition of the discrete theorem).
pub fn bound_mi_ula(
    alpha: f64,
    eta: f64,
    alpha_l: SobolevConstant,
    mi_l: f64,
    steps: u64,
) -> Result<f64> {
    check_pos(alpha, "alpha")?;
    check_pos(eta, "eta")?;
    check_nonneg(mi_l, "reference MI")?;
    if alpha * eta >= 1.0 {
        return Err(Error::domain("ULA bound requires alpha·eta < 1"));
    }
    let gamma = 1.0 - alpha * eta;
    // log-space to survive steps in the hundreds
    let log_factor = 2.0 * steps as f64 * gamma.ln();
    Ok(log_factor.exp() * (alpha / alpha_l.value()).max(1.0) * mi_l)
}

/// Proximal sampler MI decay: `mi_l/(1 + η·min{α, α_l})^{2·steps}`.
pub fn bound_mi_proximal(
    alpha: f64,
    eta: f64,
    alpha_l: SobolevConstant,
    mi_l: f64,
    steps: u64,
) -> Result<f64> {
    check_pos(alpha, "alpha")?;
    check_pos(eta, "eta")?;
    check_nonneg(mi_l, "reference MI")?;
    let rate = 1.0 + eta * alpha.min(alpha_l.value());
    Ok((-2.0 * steps as f64 * rate.ln()).exp() * mi_l)
}

/// Smallest k with the ULA theorem bound ≤ ε:
/// `k = ℓ + ⌈(1/(2αη))·log(ε⁻¹·max{1, α/α_l}·mi_l)⌉` (clamped at ℓ).
pub fn iters_ula(
    epsilon: f64,
    alpha: f64,
    eta: f64,
    alpha_l: SobolevConstant,
    mi_l: f64,
    ell: u64,
) -> Result<u64> {
    check_pos(epsilon, "epsilon")?;
    check_pos(alpha, "alpha")?;
    check_pos(eta, "eta")?;
    check_nonneg(mi_l, "reference MI")?;
    if alpha * eta >= 1.0 {
        return Err(Error::domain("requires alpha·eta < 1"));
    }
    let arg = (alpha / alpha_l.value()).max(1.0) * mi_l / epsilon;
    if arg <= 1.0 {
        return Ok(ell);
    }
    let extra = (arg.ln() / (2.0 * alpha * eta)).ceil() as u64;
    Ok(ell + extra)
}

/// Smallest k with the proximal theorem bound ≤ ε:
/// `k = ℓ + ⌈(½ + 1/(2η·min{α, α_l}))·log(ε⁻¹·mi_l)⌉` (clamped at ℓ).
pub fn iters_proximal(
    epsilon: f64,
    alpha: f64,
    eta: f64,
    alpha_l: SobolevConstant,
    mi_l: f64,
    ell: u64,
) -> Result<u64> {
    check_pos(epsilon, "epsilon")?;
    check_pos(alpha, "alpha")?;
    check_pos(eta, "eta")?;
    check_nonneg(mi_l, "reference MI")?;
    if mi_l / epsilon <= 1.0 {
        return Ok(ell);
    }
    let factor = 0.5 + 1.0 / (2.0 * eta * alpha.min(alpha_l.value()));
    Ok(ell + (factor * (mi_l / epsilon).ln()).ceil() as u64)
}

/// Sobolev constant after running Langevin for `dt`:
/// `1/out = e^{−2α dt}/α_s + (1 − e^{−2α dt})/α`. Interpolates between α_s
/// (dt = 0) and α (dt → ∞).
pub fn sobolev_evolution_langevin(
    alpha: f64,
    alpha_s: SobolevConstant,
    dt: f64,
) -> Result<SobolevConstant> {
    check_pos(alpha, "alpha")?;
    check_nonneg(dt, "elapsed time")?;
    let w = (-2.0 * alpha * dt).exp();
    SobolevConstant::new(1.0 / (w / alpha_s.value() + (1.0 - w) / alpha))
}

/// Sobolev constant after one ULA step (pushforward by x ↦ x − η∇f, which is
/// γ-Lipschitz, then convolution with N(0, 2ηI)): `α_ρ/(γ² + 2η·α_ρ)`.
pub fn sobolev_evolution_ula(alpha_rho: f64, gamma: f64, eta: f64) -> Result<SobolevConstant> {
    check_pos(alpha_rho, "alpha_rho")?;
    check_nonneg(eta, "eta")?;
    if !(gamma > 0.0) {
        return Err(Error::domain("gamma must be > 0"));
    }
    SobolevConstant::new(alpha_rho / (gamma * gamma + 2.0 * eta * alpha_rho))
}

/// Sobolev constant after one full proximal-sampler step:
/// `1/out = (1 + α_ρη)/(α_ρ(1+αη)²) + η/(1+αη)`. Fixed point at α_ρ = α.
pub fn sobolev_evolution_proximal(
    alpha: f64,
    alpha_rho: f64,
    eta: f64,
) -> Result<SobolevConstant> {
    check_pos(alpha, "alpha")?;
    check_pos(alpha_rho, "alpha_rho")?;
    check_pos(eta, "eta")?;
    let r = 1.0 + alpha * eta;
    SobolevConstant::new(1.0 / ((1.0 + alpha_rho * eta) / (alpha_rho * r * r) + eta / r))
}

/// Contraction coefficient of the Langevin kernel over time t against an
/// α-SLC target, from a marginal with Sobolev constant α_ρ:
/// `αe^{−2αt}/(α_ρ(1−e^{−2αt}) + αe^{−2αt})` ∈ (0, 1].
pub fn contraction_langevin(alpha: f64, alpha_rho: f64, t: f64) -> Result<f64> {
    check_pos(alpha, "alpha")?;
    check_pos(alpha_rho, "alpha_rho")?;
    check_nonneg(t, "time")?;
    let w = (-2.0 * alpha * t).exp();
    Ok(alpha * w / (alpha_rho * (1.0 - w) + alpha * w))
}

/// One-step ULA contraction coefficient: `γ²/(γ² + 2η·α_ρ)` ∈ (0, 1).
pub fn contraction_ula(gamma: f64, eta: f64, alpha_rho: f64) -> Result<f64> {
    check_pos(gamma, "gamma")?;
    check_nonneg(eta, "eta")?;
    check_nonneg(alpha_rho, "alpha_rho")?;
    let g2 = gamma * gamma;
    Ok(g2 / (g2 + 2.0 * eta * alpha_rho))
}

/// One-step proximal-sampler contraction coefficient:
/// `1/(1 + 2η·α_ρ + η²·α·α_ρ)`.
pub fn contraction_proximal(alpha: f64, eta: f64, alpha_rho: f64) -> Result<f64> {
    check_pos(alpha, "alpha")?;
    check_nonneg(eta, "eta")?;
    check_nonneg(alpha_rho, "alpha_rho")?;
    Ok(1.0 / (1.0 + 2.0 * eta * alpha_rho + eta * eta * alpha * alpha_rho))
}

/// Forward heat-flow (Y|X ~ N(X, ηI)) contraction coefficient: `1/(1 + η·α_ρ)`.
pub fn contraction_forward_heat(eta: f64, alpha_rho: f64) -> Result<f64> {
    check_nonneg(eta, "eta")?;
    check_nonneg(alpha_rho, "alpha_rho")?;
    Ok(1.0 / (1.0 + eta * alpha_rho))
}

/// Backward heat-flow contraction coefficient at time t of a horizon-T
/// bridge against an α-SLC target: `(1+αT−αt)/((1+αT)(1+α_ρt) − αt)`.
pub fn contraction_backward_heat(alpha: f64, t_horizon: f64, t: f64, alpha_rho: f64) -> Result<f64> {
    check_pos(alpha, "alpha")?;
    check_nonneg(alpha_rho, "alpha_rho")?;
    if !(0.0 <= t && t <= t_horizon) {
        return Err(Error::domain("need 0 ≤ t ≤ T"));
    }
    Ok((1.0 + alpha * t_horizon - alpha * t)
        / ((1.0 + alpha * t_horizon) * (1.0 + alpha_rho * t) - alpha * t))
}

/// Sobolev-constant evolution along the backward heat flow:
/// `1/out = (1/α₀)(1 − αt/(1+αT))² + t(1 + α(T−t))/(1+αT)`.
pub fn sobolev_evolution_backward_heat(
    alpha: f64,
    t_horizon: f64,
    t: f64,
    alpha0: SobolevConstant,
) -> Result<SobolevConstant> {
    check_pos(alpha, "alpha")?;
    if !(0.0 <= t && t <= t_horizon) {
        return Err(Error::domain("need 0 ≤ t ≤ T"));
    }
    let denom = 1.0 + alpha * t_horizon;
    let shrink = 1.0 - alpha * t / denom;
    let inv = shrink * shrink / alpha0.value() + t * (1.0 + alpha * (t_horizon - t)) / denom;
    SobolevConstant::new(1.0 / inv)
}

/// Chains per-step contraction coefficients: `mi_l·∏ coeffs`, evaluated in
/// log space. Every coefficient must lie in (0, 1].
pub fn mi_bound_via_coefficients(coeffs: &[f64], mi_l: f64) -> Result<f64> {
    check_nonneg(mi_l, "reference MI")?;
    let mut log_prod = 0.0;
    for &c in coeffs {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::domain("contraction coefficients must be in (0, 1]"));
        }
        log_prod += c.ln();
    }
    Ok(mi_l * log_prod.exp())
}

/// Φ-divergence decay along Langevin when the target satisfies a Φ-Sobolev
/// inequality with constant `alpha_phisi`: `e^{−2α t}·d0`.
pub fn bound_phi_divergence_langevin(alpha_phisi: f64, t: f64, d0: f64) -> Result<f64> {
    check_pos(alpha_phisi, "alpha_phisi")?;
    check_nonneg(t, "time")?;
    check_nonneg(d0, "initial divergence")?;
    Ok((-2.0 * alpha_phisi * t).exp() * d0)
}

/// Unconditional (regularity) MI bound for Langevin after time t from an
/// initialization with total variance `var0`: `α·var0/(e^{2αt}−1)`, with the
/// weakly log-concave limit `var0/(2t)` at α = 0 (the formulas are
/// continuous at α → 0).
pub fn bound_mi_regularity_ld(alpha: f64, t: f64, var0: f64) -> Result<f64> {
    check_nonneg(alpha, "alpha")?;
    check_pos(t, "time")?;
    check_nonneg(var0, "initial variance")?;
    if alpha == 0.0 {
        return Ok(var0 / (2.0 * t));
    }
    Ok(alpha * var0 / (2.0 * alpha * t).exp_m1())
}

/// Unconditional MI bound for ULA after k ≥ 1 steps:
/// `α·var0/((1−ηα)^{−2k} − 1)`.
pub fn bound_mi_regularity_ula(alpha: f64, eta: f64, k: u64, var0: f64) -> Result<f64> {
    check_pos(alpha, "alpha")?;
    check_pos(eta, "eta")?;
    check_nonneg(var0, "initial variance")?;
    if alpha * eta >= 1.0 {
        return Err(Error::domain("requires alpha·eta < 1"));
    }
    if k == 0 {
        return Err(Error::domain("requires k ≥ 1"));
    }
    let gamma = 1.0 - eta * alpha;
    Ok(alpha * var0 / ((-2.0 * k as f64 * gamma.ln()).exp() - 1.0))
}

/// Unconditional MI bound after the first proximal-sampler step: `var0/(2η)`.
pub fn bound_mi_proximal_first_step(eta: f64, var0: f64) -> Result<f64> {
    check_pos(eta, "eta")?;
    check_nonneg(var0, "initial variance")?;
    Ok(var0 / (2.0 * eta))
}

/// Operator-norm bound on the cross-covariance from mutual information:
/// `ξ·√(2·var_opnorm·mi)`. For a Gaussian Y marginal (KL generator),
/// ξ = √λ_max(Cov(Y)).
pub fn bound_cov_from_mi(mi: f64, var_opnorm: f64, xi: f64) -> Result<f64> {
    check_nonneg(mi, "mi")?;
    check_nonneg(var_opnorm, "var_opnorm")?;
    check_nonneg(xi, "xi")?;
    Ok(xi * (2.0 * var_opnorm * mi).sqrt())
}

/// Autocovariance decay of a stationary reversible semigroup with Poincaré
/// constant α: `Cov(f(X₀), f(X_t)) ≤ e^{−αt}·Var f`.
pub fn bound_cov_decay_poincare(alpha: f64, t: f64, var_f: f64) -> Result<f64> {
    check_pos(alpha, "alpha")?;
    check_nonneg(t, "time")?;
    check_nonneg(var_f, "var_f")?;
    Ok((-alpha * t).exp() * var_f)
}

/// KL(ρ_t ∥ ν) regularity bound from an initial squared Wasserstein
/// distance: `α·w2sq/(2(e^{2αt}−1))`, with limit `w2sq/(4t)` at α = 0.
pub fn bound_kl_regularity(alpha: f64, t: f64, w2sq: f64) -> Result<f64> {
    check_nonneg(alpha, "alpha")?;
    check_pos(t, "time")?;
    check_nonneg(w2sq, "w2sq")?;
    if alpha == 0.0 {
        return Ok(w2sq / (4.0 * t));
    }
    Ok(alpha * w2sq / (2.0 * (2.0 * alpha * t).exp_m1()))
}

/// Pointwise KL mixing to level ε at some step k implies MI(X₀; X_k) ≤ ε; a
/// documentation-level passthrough recorded in reports.
pub fn mi_from_pointwise_mixing(epsilon: f64) -> Result<f64> {
    check_nonneg(epsilon, "epsilon")?;
    Ok(epsilon)
}

/// Why a report row was flagged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// exact MI exceeded the theorem bound beyond the slack
    ExactAboveTheorem,
    /// empirical MI minus mc_sigma·CI exceeded the theorem bound
    EmpiricalAboveTheorem,
    /// measured cross-covariance norm exceeded the covariance bound
    CovAboveBound,
}

#[derive(Debug, Clone)]
pub struct Violation {
    /// Row position in the report grid.
    pub row: usize,
    pub kind: ViolationKind,
    /// How far above the bound the offending value was.
    pub margin: f64,
}

/// One grid entry of a [`BoundReport`]; fields are `None` where a column is
/// not applicable to the chain/configuration.
#[derive(Debug, Clone, Default)]
pub struct BoundRow {
    /// Iteration count (grid position for continuous time).
    pub index: u64,
    /// Physical time of the row (k·η for discrete chains).
    pub time: f64,
    pub exact_mi: Option<f64>,
    pub empirical_mi: Option<f64>,
    pub ci_halfwidth: Option<f64>,
    pub thm_bound: Option<f64>,
    pub thm_bound_sharp: Option<f64>,
    pub regularity_bound: Option<f64>,
    pub sobolev_lower: Option<f64>,
    pub contraction_coeff: Option<f64>,
    pub cov_opnorm: Option<f64>,
    pub cov_bound: Option<f64>,
}

/// Per-index trajectories of everything the harness verifies.
#[derive(Debug, Clone, Default)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub violations: Vec<Violation>,
}
