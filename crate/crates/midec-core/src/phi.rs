//! The Φ-divergence family.
//!
//! A generator Φ is convex with Φ(1) = 0 and defines
//! `D_Φ(μ∥ν) = E_ν[Φ(μ/ν)]`. Six generators are provided:
//!
//! | name          | Φ(x)          | divergence          |
//! |---------------|---------------|---------------------|
//! | `kl`          | x·log x       | Kullback–Leibler    |
//! | `chi2`        | (x−1)²        | chi-squared         |
//! | `hellinger2`  | ½(√x−1)²      | squared Hellinger   |
//! | `tv`          | ½\|x−1\|      | total variation     |
//! | `reverse-kl`  | −log x        | reverse KL          |
//! | `reverse-chi2`| 1/x − x       | reverse chi-squared |
//!
//! TV is not twice differentiable, so it is accepted only by the plain
//! divergence paths; Fisher-information, Sobolev and mutual-information
//! functionals require a smooth generator.
//!
//! Also here: the Φ-Fisher information `E_ν[|∇(μ/ν)|²·Φ″(μ/ν)]`, certified
//! Φ-Sobolev constants and their algebra (strong log-concavity, Lipschitz
//! pushforward, convolution), and Φ-mutual information of Gaussian joints.

use alloc::format;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::gaussian::JointGaussianState;
use crate::linalg;
use crate::quad;
use crate::targets::GaussianDist;

/// Densities below this are clipped in quadrature ratio computations; where
/// the reference density q is below it the contribution is treated as 0.
pub const DENSITY_CLIP: f64 = 1e-300;

/// Selects the divergence family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhiKind {
    Kl,
    ChiSquared,
    SquaredHellinger,
    TotalVariation,
    ReverseKl,
    ReverseChiSquared,
}

pub const ALL_KINDS: [PhiKind; 6] = [
    PhiKind::Kl,
    PhiKind::ChiSquared,
    PhiKind::SquaredHellinger,
    PhiKind::TotalVariation,
    PhiKind::ReverseKl,
    PhiKind::ReverseChiSquared,
];

/// Smooth (twice-differentiable) kinds, i.e. everything but TV.
pub const SMOOTH_KINDS: [PhiKind; 5] = [
    PhiKind::Kl,
    PhiKind::ChiSquared,
    PhiKind::SquaredHellinger,
    PhiKind::ReverseKl,
    PhiKind::ReverseChiSquared,
];

impl PhiKind {
    /// Config/CLI name.
    pub fn name(self) -> &'static str {
        match self {
            PhiKind::Kl => "kl",
            PhiKind::ChiSquared => "chi2",
            PhiKind::SquaredHellinger => "hellinger2",
            PhiKind::TotalVariation => "tv",
            PhiKind::ReverseKl => "reverse-kl",
            PhiKind::ReverseChiSquared => "reverse-chi2",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        ALL_KINDS
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::input(format!("unknown generator name {name:?}")))
    }

    /// False only for TV.
    pub fn smooth(self) -> bool {
        self != PhiKind::TotalVariation
    }

    /// Is Φ or Φ′ singular at x = 0 (so the generator requires x > 0)?
    pub fn singular_at_zero(self) -> bool {
        matches!(self, PhiKind::Kl | PhiKind::ReverseKl | PhiKind::ReverseChiSquared)
    }

    fn check_domain(self, x: f64) -> Result<()> {
        if !(x >= 0.0) {
            return Err(Error::domain("generator argument must be ≥ 0"));
        }
        if x == 0.0 && self.singular_at_zero() {
            return Err(Error::domain(format!(
                "generator {:?} is singular at 0",
                self.name()
            )));
        }
        Ok(())
    }

    /// Φ(x).
    pub fn value(self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(match self {
            PhiKind::Kl => x * x.ln(),
            PhiKind::ChiSquared => (x - 1.0) * (x - 1.0),
            PhiKind::SquaredHellinger => {
                let s = x.sqrt() - 1.0;
                0.5 * s * s
            }
            PhiKind::TotalVariation => 0.5 * (x - 1.0).abs(),
            PhiKind::ReverseKl => -x.ln(),
            PhiKind::ReverseChiSquared => 1.0 / x - x,
        })
    }

    /// Φ′(x). For TV, the subgradient ±½ (sign of x−1, 0 at x=1).
    pub fn d1(self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(match self {
            PhiKind::Kl => x.ln() + 1.0,
            PhiKind::ChiSquared => 2.0 * (x - 1.0),
            PhiKind::SquaredHellinger => 0.5 * (1.0 - 1.0 / x.sqrt()),
            PhiKind::TotalVariation => 0.5 * (x - 1.0).signum() * if x == 1.0 { 0.0 } else { 1.0 },
            PhiKind::ReverseKl => -1.0 / x,
            PhiKind::ReverseChiSquared => -1.0 / (x * x) - 1.0,
        })
    }

    /// Φ″(x); an error for TV, which is not twice differentiable.
    pub fn d2(self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        match self {
            PhiKind::Kl => Ok(1.0 / x),
            PhiKind::ChiSquared => Ok(2.0),
            PhiKind::SquaredHellinger => Ok(0.25 / (x * x.sqrt())),
            PhiKind::TotalVariation => {
                Err(Error::capability("tv generator has no second derivative"))
            }
            PhiKind::ReverseKl => Ok(1.0 / (x * x)),
            PhiKind::ReverseChiSquared => Ok(2.0 / (x * x * x)),
        }
    }
}

/// The triple (Φ(x), Φ′(x), Φ″(x)); an error for TV, whose second derivative
/// does not exist.
pub fn phi_eval(kind: PhiKind, x: f64) -> Result<(f64, f64, f64)> {
    Ok((kind.value(x)?, kind.d1(x)?, kind.d2(x)?))
}

/// D_Φ(μ∥ν) between Gaussians.
///
/// Closed forms for KL and chi-squared in any dimension; the remaining kinds
/// fall back to 1-d quadrature. The chi-squared integral genuinely diverges
/// unless 2Σ_ν − Σ_μ is positive definite; that case returns `+inf`.
pub fn phi_divergence_gaussian(
    kind: PhiKind,
    mu: &GaussianDist,
    nu: &GaussianDist,
) -> Result<f64> {
    if mu.dim() != nu.dim() {
        return Err(Error::input("dimension mismatch"));
    }
    match kind {
        PhiKind::Kl => crate::gaussian::gaussian_kl(mu, nu),
        PhiKind::ChiSquared => chi2_gaussian(mu, nu),
        _ if mu.dim() == 1 => {
            let (a, b) = quadrature_domain(&[mu, nu]);
            let p = |x: f64| mu.density_1d(x);
            let q = |x: f64| nu.density_1d(x);
            phi_divergence_quadrature_1d(kind, &p, &q, a, b, 1e-9)
        }
        _ => Err(Error::capability(format!(
            "generator {:?} has no closed form in dimension {}; only d=1 quadrature is available",
            kind.name(),
            mu.dim()
        ))),
    }
}

/// χ²(μ∥ν) = det Σ_ν / √(det Σ_μ · det(2Σ_ν − Σ_μ)) · exp(Δmᵀ(2Σ_ν−Σ_μ)⁻¹Δm) − 1,
/// valid when 2Σ_ν − Σ_μ ≻ 0; otherwise the integral diverges (+inf).
fn chi2_gaussian(mu: &GaussianDist, nu: &GaussianDist) -> Result<f64> {
    let s = nu.cov() * 2.0 - mu.cov();
    let eigs = linalg::sym_eigenvalues(&s);
    let scale = linalg::sym_eig_max(nu.cov());
    if eigs[0] <= 1e-14 * scale.max(1.0) {
        return Ok(f64::INFINITY);
    }
    let dm = mu.mean() - nu.mean();
    let quad_term = (linalg::inv_floored(&s) * &dm).dot(&dm);
    let log_pref = linalg::log_det_sym(nu.cov())
        - 0.5 * (linalg::log_det_sym(mu.cov()) + linalg::log_det_sym(&s));
    Ok((log_pref + quad_term).exp() - 1.0)
}

/// Quadrature window [m − 10σ, m + 10σ] enclosing all listed 1-d Gaussians;
/// Gaussian tails past 10σ are negligible at double precision.
fn quadrature_domain(dists: &[&GaussianDist]) -> (f64, f64) {
    let mut a = f64::INFINITY;
    let mut b = f64::NEG_INFINITY;
    for g in dists {
        let m = g.mean()[0];
        let s = g.cov()[(0, 0)].sqrt();
        a = a.min(m - 10.0 * s);
        b = b.max(m + 10.0 * s);
    }
    (a, b)
}

fn check_normalized(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    what: &str,
) -> Result<()> {
    let mass = quad::adaptive_simpson(f, a, b, tol)?;
    // The quadrature itself carries error up to tol, so allow a small margin
    // on top of the requested normalization tolerance.
    if (mass - 1.0).abs() > 10.0 * tol {
        return Err(Error::input(format!(
            "{what} does not integrate to 1 over the domain (got {mass})"
        )));
    }
    Ok(())
}

/// D_Φ(p∥q) for 1-d density callbacks by adaptive Simpson quadrature with
/// absolute tolerance `tol`. Both densities must integrate to 1 on `[a, b]`.
///
/// Returns `+inf` when the integral diverges (running value beyond 1e12 or a
/// nonfinite integrand).
pub fn phi_divergence_quadrature_1d(
    kind: PhiKind,
    p: &dyn Fn(f64) -> f64,
    q: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64> {
    check_normalized(p, a, b, tol, "p")?;
    check_normalized(q, a, b, tol, "q")?;
    let integrand = move |x: f64| {
        let qx = q(x);
        if qx < DENSITY_CLIP {
            return 0.0;
        }
        let ratio = p(x).max(DENSITY_CLIP) / qx;
        match kind.value(ratio) {
            Ok(v) => qx * v,
            Err(_) => f64::NAN, // propagates as divergence
        }
    };
    quad::adaptive_simpson(&integrand, a, b, tol)
}

/// Φ-Fisher information FI_Φ(p∥q) = E_q[|∂ₓ(p/q)|²·Φ″(p/q)] for 1-d density
/// callbacks. The ratio derivative is taken by central differences.
///
/// Smooth kinds only. For generators with unbounded Φ″ near 0 (reverse KL,
/// reverse chi-squared) the integral may genuinely diverge when p has much
/// lighter tails than q; that is reported as `+inf`.
pub fn phi_fisher_info_quadrature_1d(
    kind: PhiKind,
    p: &dyn Fn(f64) -> f64,
    q: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64> {
    if !kind.smooth() {
        return Err(Error::capability("Fisher information requires a smooth generator"));
    }
    let ratio = move |x: f64| {
        let qx = q(x);
        if qx < DENSITY_CLIP {
            return f64::NAN;
        }
        p(x).max(DENSITY_CLIP) / qx
    };
    let integrand = move |x: f64| {
        let qx = q(x);
        if qx < DENSITY_CLIP {
            return 0.0;
        }
        let h = 1e-5 * (1.0 + x.abs());
        let (rm, r0, rp) = (ratio(x - h), ratio(x), ratio(x + h));
        if !(rm.is_finite() && r0.is_finite() && rp.is_finite()) {
            return 0.0;
        }
        let dr = (rp - rm) / (2.0 * h);
        match kind.d2(r0.max(DENSITY_CLIP)) {
            Ok(d2) => qx * dr * dr * d2,
            Err(_) => f64::NAN,
        }
    };
    quad::adaptive_simpson(&integrand, a, b, tol)
}

/// A certified lower bound on the optimal Φ-Sobolev constant of some
/// distribution: 2·value·D_Φ(μ∥ν) ≤ FI_Φ(μ∥ν) for all μ.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SobolevConstant(f64);

impl SobolevConstant {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::domain("Sobolev constant must be finite and > 0"));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// An α-strongly log-concave distribution satisfies the Φ-Sobolev inequality
/// with constant α, for every smooth generator.
pub fn sobolev_constant_slc(alpha: f64) -> Result<SobolevConstant> {
    SobolevConstant::new(alpha)
}

/// Pushforward through a γ-Lipschitz map divides the constant by γ².
pub fn sobolev_pushforward(c: SobolevConstant, lip: f64) -> Result<SobolevConstant> {
    if !(lip > 0.0) {
        return Err(Error::domain("Lipschitz constant must be > 0"));
    }
    SobolevConstant::new(c.value() / (lip * lip))
}

/// Convolution composes constants harmonically: 1/(1/c₁ + 1/c₂).
pub fn sobolev_convolution(c1: SobolevConstant, c2: SobolevConstant) -> SobolevConstant {
    SobolevConstant::new(1.0 / (1.0 / c1.value() + 1.0 / c2.value()))
        .expect("harmonic mean of positive constants is positive")
}

/// Φ-mutual information of a Gaussian joint law.
///
/// KL in any dimension via canonical correlations:
/// `MI = −½·log det(I − C)` with `C = W₀·Σ₀ₖ·Σₖ⁻¹·Σₖ₀·W₀` (the squared
/// canonical-correlation matrix). Other smooth kinds are supported in d = 1
/// through the conditional decomposition `E_{x∼ρ₀}[D_Φ(ρ_{k|0=x} ∥ ρₖ)]`
/// with a 64-node Gauss–Hermite outer rule. TV is rejected.
///
/// A degenerate joint (canonical correlation 1, e.g. X_k = X₀) yields `+inf`.
pub fn phi_mutual_info_gaussian(joint: &JointGaussianState, kind: PhiKind) -> Result<f64> {
    if !kind.smooth() {
        return Err(Error::capability(
            "mutual information requires a smooth generator (tv rejected)",
        ));
    }
    if joint.cross.iter().all(|&c| c == 0.0) {
        return Ok(0.0);
    }
    match kind {
        PhiKind::Kl => kl_mutual_info_gaussian(joint),
        _ if joint.d == 1 => conditional_mi_1d(joint, kind),
        _ => Err(Error::capability(format!(
            "generator {:?} supports mutual information only in d=1",
            kind.name()
        ))),
    }
}

fn kl_mutual_info_gaussian(joint: &JointGaussianState) -> Result<f64> {
    let w0 = linalg::inv_sqrt_floored(&joint.cov0);
    let wk = linalg::inv_sqrt_floored(&joint.covk);
    let a = &w0 * &joint.cross * &wk;
    let c = &a * a.transpose();
    let mut mi = 0.0;
    for lam in linalg::sym_eigenvalues(&c) {
        let lam = lam.clamp(0.0, 1.0);
        if lam >= 1.0 - 1e-12 {
            return Ok(f64::INFINITY);
        }
        mi -= 0.5 * (1.0 - lam).ln();
    }
    Ok(mi)
}

const GH_NODES: usize = 64;

/// d=1 conditional decomposition: X_k | X₀=x ~ N(m_k + c(x−m₀)/v₀, v_k − c²/v₀),
/// averaged against X₀ ~ N(m₀, v₀) by Gauss–Hermite.
fn conditional_mi_1d(joint: &JointGaussianState, kind: PhiKind) -> Result<f64> {
    let (m0, v0) = (joint.mean0[0], joint.cov0[(0, 0)]);
    let (mk, vk) = (joint.meank[0], joint.covk[(0, 0)]);
    let c = joint.cross[(0, 0)];
    let cond_var = vk - c * c / v0;
    if cond_var <= 1e-12 * vk {
        return Ok(f64::INFINITY);
    }
    let marginal = GaussianDist::scalar(mk, vk)?;
    let (nodes, weights) = quad::gauss_hermite(GH_NODES);
    let scale = (2.0 * v0).sqrt();
    let norm = core::f64::consts::PI.sqrt();
    let mut total = 0.0;
    for (&t, &w) in nodes.iter().zip(weights.iter()) {
        let x = m0 + scale * t;
        let cond = GaussianDist::scalar(mk + c * (x - m0) / v0, cond_var)?;
        let div = phi_divergence_gaussian(kind, &cond, &marginal)?;
        if div.is_infinite() {
            return Ok(f64::INFINITY);
        }
        total += w * div;
    }
    Ok(total / norm)
}
