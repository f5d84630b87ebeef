//! The three Markov chains — Langevin (Euler–Maruyama or exact OU), ULA and
//! the proximal sampler — run with per-chain seeded randomness, recording
//! (X₀, X_k) pairs at requested indices.
//!
//! Chains are embarrassingly parallel: [`simulate_chain`] is a pure function
//! of `(config, target, chain_index)` so a harness may fan chains out across
//! threads and merge results by index. [`run_chain_pairs`] is the sequential
//! reference driver.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::{chain_rng, standard_normal_vector};
use crate::targets::{GaussianDist, Potential};

/// Tolerance on ‖∇g‖ when locating the proximal proposal center.
const RGO_GRAD_TOL: f64 = 1e-10;
/// Iteration cap for that minimization.
const RGO_MAX_OPT_ITERS: u64 = 10_000;

/// What the chains sample from. Gaussian targets unlock exact transitions
/// (OU path, closed-form restricted Gaussian oracle); smooth potentials go
/// through gradient oracles and rejection sampling.
#[derive(Debug, Clone)]
pub enum ChainTarget {
    Gaussian(GaussianDist),
    Smooth(Potential),
}

impl ChainTarget {
    pub fn dim(&self) -> usize {
        match self {
            ChainTarget::Gaussian(g) => g.dim(),
            ChainTarget::Smooth(p) => p.dim(),
        }
    }

    /// Smoothness constant L when known (1/λ_min for Gaussians).
    pub fn smoothness(&self) -> Option<f64> {
        match self {
            ChainTarget::Gaussian(g) => {
                let lo = g.cov_min_eigenvalue();
                (lo > 0.0).then(|| 1.0 / lo)
            }
            ChainTarget::Smooth(p) => p.smoothness(),
        }
    }

    /// ∇f at x; every call counts as one oracle invocation for the caller.
    fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            ChainTarget::Gaussian(g) => {
                // ∇[½(x−m)ᵀΣ⁻¹(x−m)] via the spectral inverse
                let (v, lam) = linalg::sym_eig(g.cov());
                let centered = x - g.mean();
                let mut w = v.transpose() * centered;
                for i in 0..w.len() {
                    w[i] /= lam[i].max(f64::MIN_POSITIVE);
                }
                &v * w
            }
            ChainTarget::Smooth(p) => p.grad(x),
        }
    }
}

/// Which chain to run and its discretization knobs.
#[derive(Debug, Clone)]
pub enum ChainKind {
    /// Euler–Maruyama discretization of the Langevin diffusion with substep
    /// `em_substep`; `exact_gaussian` switches to the exact OU transition
    /// (only valid for Gaussian targets, where it removes discretization
    /// bias from continuous-time comparisons).
    LangevinEm { em_substep: f64, exact_gaussian: bool },
    Ula,
    Proximal,
}

/// Where along the chain to record (X₀, X_k) pairs: iteration counts for the
/// discrete chains, physical times for Langevin.
#[derive(Debug, Clone)]
pub enum RecordPoints {
    Steps(Vec<u64>),
    Times(Vec<f64>),
}

impl RecordPoints {
    pub fn len(&self) -> usize {
        match self {
            RecordPoints::Steps(s) => s.len(),
            RecordPoints::Times(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self) -> Result<()> {
        match self {
            RecordPoints::Steps(s) => {
                if !s.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::input("record steps must be strictly increasing"));
                }
            }
            RecordPoints::Times(t) => {
                if t.iter().any(|v| !(v.is_finite() && *v >= 0.0))
                    || !t.windows(2).all(|w| w[0] < w[1])
                {
                    return Err(Error::input(
                        "record times must be finite, nonnegative and strictly increasing",
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub kind: ChainKind,
    /// Step size for the discrete chains (unused by Langevin, which follows
    /// the record times directly).
    pub eta: f64,
    pub records: RecordPoints,
    pub n_chains: usize,
    pub seed: u64,
    pub init: GaussianDist,
}

impl ChainConfig {
    /// Checks the config against a target: positivity of knobs, sorted
    /// records, dimension match, and the step-size preconditions η ≤ 1/L
    /// (ULA) and η < 1/L (proximal rejection sampling).
    pub fn validate(&self, target: &ChainTarget) -> Result<()> {
        if self.n_chains == 0 {
            return Err(Error::input("n_chains must be ≥ 1"));
        }
        if self.init.dim() != target.dim() {
            return Err(Error::input("initialization dimension differs from target"));
        }
        self.records.validate()?;
        match (&self.kind, &self.records) {
            (ChainKind::LangevinEm { .. }, RecordPoints::Steps(_)) => {
                return Err(Error::input("langevin chains record at times, not steps"));
            }
            (ChainKind::Ula | ChainKind::Proximal, RecordPoints::Times(_)) => {
                return Err(Error::input("discrete chains record at integer steps"));
            }
            _ => {}
        }
        match &self.kind {
            ChainKind::LangevinEm { em_substep, exact_gaussian } => {
                if *exact_gaussian {
                    if !matches!(target, ChainTarget::Gaussian(_)) {
                        return Err(Error::capability(
                            "exact Langevin transitions require a Gaussian target",
                        ));
                    }
                } else if !(*em_substep > 0.0 && em_substep.is_finite()) {
                    return Err(Error::input("em_substep must be positive"));
                }
            }
            ChainKind::Ula => {
                if !(self.eta > 0.0 && self.eta.is_finite()) {
                    return Err(Error::input("eta must be positive"));
                }
                if let Some(l) = target.smoothness() {
                    if self.eta > 1.0 / l {
                        return Err(Error::input("ULA requires eta ≤ 1/L"));
                    }
                }
            }
            ChainKind::Proximal => {
                if !(self.eta > 0.0 && self.eta.is_finite()) {
                    return Err(Error::input("eta must be positive"));
                }
                if let ChainTarget::Smooth(p) = target {
                    match p.smoothness() {
                        Some(l) if self.eta < 1.0 / l => {}
                        Some(_) => {
                            return Err(Error::input(
                                "proximal rejection sampling requires eta < 1/L",
                            ))
                        }
                        None => {
                            return Err(Error::capability(
                                "proximal sampling needs a known smoothness constant",
                            ))
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Recorded (X₀, X_k) pairs: `pairs[r][c]` is chain c at record point r,
/// always paired with that chain's initial state.
#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub pairs: Vec<Vec<(DVector<f64>, DVector<f64>)>>,
    /// Total gradient evaluations plus RGO proposal rounds across all chains.
    pub oracle_call_count: u64,
    pub seed: u64,
    /// RNG stream id of each chain (= its index).
    pub stream_ids: Vec<u64>,
}

fn check_state(x: &DVector<f64>, g: &DVector<f64>) -> Result<()> {
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::ChainFailure {
            message: alloc::string::String::from("nonfinite gradient"),
            state: x.iter().copied().collect(),
        });
    }
    Ok(())
}

/// One ULA update `x − η∇f(x) + √(2η)·z` with the noise passed in explicitly
/// (callers own the RNG).
pub fn ula_step(p: &ChainTarget, x: &DVector<f64>, eta: f64, z: &DVector<f64>) -> Result<DVector<f64>> {
    if !(eta > 0.0) {
        return Err(Error::input("eta must be positive"));
    }
    let g = p.grad(x);
    check_state(x, &g)?;
    Ok(x - eta * g + (2.0 * eta).sqrt() * z)
}

/// Runs Euler–Maruyama for time `t` with substep `dt` (final substep
/// truncated so the total time is exactly t). Returns the end state and the
/// number of gradient evaluations.
pub fn langevin_em<R: Rng + ?Sized>(
    p: &ChainTarget,
    x0: &DVector<f64>,
    t: f64,
    dt: f64,
    rng: &mut R,
) -> Result<(DVector<f64>, u64)> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::input("time must be finite and nonnegative"));
    }
    if !(dt > 0.0) {
        return Err(Error::input("dt must be positive"));
    }
    let d = x0.len();
    let n = (t / dt).ceil() as u64;
    let mut x = x0.clone();
    let mut calls = 0u64;
    for i in 0..n {
        let h = dt.min(t - i as f64 * dt);
        if h <= 0.0 {
            break;
        }
        let g = p.grad(&x);
        calls += 1;
        check_state(&x, &g)?;
        let z = standard_normal_vector(d, rng);
        x = x - h * g + (2.0 * h).sqrt() * z;
    }
    Ok((x, calls))
}

/// Exact Langevin (Ornstein–Uhlenbeck) transition over time `t` against a
/// Gaussian target N(m, Σ), deterministic in the supplied noise: in the
/// eigenbasis of Σ each coordinate decays by e^{−t/λ} and receives fresh
/// variance λ(1−e^{−2t/λ}).
pub fn ou_exact_step(
    target: &GaussianDist,
    x: &DVector<f64>,
    t: f64,
    z: &DVector<f64>,
) -> Result<DVector<f64>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::input("time must be finite and nonnegative"));
    }
    let lo = target.cov_min_eigenvalue();
    if !(lo > 0.0) {
        return Err(Error::domain("exact Langevin transition needs a nonsingular target"));
    }
    let (v, lam) = linalg::sym_eig(target.cov());
    let mut w = v.transpose() * (x - target.mean());
    let zw = v.transpose() * z;
    for i in 0..w.len() {
        let decay = (-t / lam[i]).exp();
        let noise_var = -lam[i] * (-2.0 * t / lam[i]).exp_m1();
        w[i] = decay * w[i] + noise_var.sqrt() * zw[i];
    }
    Ok(target.mean() + v * w)
}

/// Forward proximal step `y = x + √η·z`.
pub fn proximal_forward<R: Rng + ?Sized>(x: &DVector<f64>, eta: f64, rng: &mut R) -> Result<DVector<f64>> {
    if !(eta > 0.0) {
        return Err(Error::input("eta must be positive"));
    }
    let z = standard_normal_vector(x.len(), rng);
    Ok(x + eta.sqrt() * z)
}

/// Mean and covariance of the restricted Gaussian oracle for a Gaussian
/// target N(m, Σ): the conditional X|Y=y is N(M(Σ⁻¹m + y/η), M) with
/// M = (Σ⁻¹ + I/η)⁻¹. For N(0, (1/α)I) this is N(y/(1+αη), η/(1+αη)·I).
pub fn rgo_gaussian_mean_cov(
    target: &GaussianDist,
    y: &DVector<f64>,
    eta: f64,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if !(eta > 0.0) {
        return Err(Error::input("eta must be positive"));
    }
    if y.len() != target.dim() {
        return Err(Error::input("y dimension differs from target"));
    }
    if !(target.cov_min_eigenvalue() > 0.0) {
        return Err(Error::domain("restricted Gaussian oracle needs a nonsingular target"));
    }
    let (v, lam) = linalg::sym_eig(target.cov());
    // In the eigenbasis, M has eigenvalue λη/(λ+η) and the mean is the
    // precision-weighted blend η/(λ+η)·m + λ/(λ+η)·y.
    let wm = v.transpose() * target.mean();
    let wy = v.transpose() * y;
    let d = target.dim();
    let mut mean_w = DVector::zeros(d);
    let mut m_eigs = DVector::zeros(d);
    for i in 0..d {
        let s = lam[i] + eta;
        mean_w[i] = (eta * wm[i] + lam[i] * wy[i]) / s;
        m_eigs[i] = lam[i] * eta / s;
    }
    let cov = &v * DMatrix::from_diagonal(&m_eigs) * v.transpose();
    Ok((&v * mean_w, cov))
}

/// Exact RGO draw for a Gaussian target.
pub fn rgo_gaussian_exact<R: Rng + ?Sized>(
    target: &GaussianDist,
    y: &DVector<f64>,
    eta: f64,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let (mean, cov) = rgo_gaussian_mean_cov(target, y, eta)?;
    let half = linalg::sqrt_psd(&cov);
    let z = standard_normal_vector(target.dim(), rng);
    Ok(mean + half * z)
}

/// An accepted RGO draw for a smooth potential, with its cost counters.
#[derive(Debug, Clone)]
pub struct RgoSample {
    pub x: DVector<f64>,
    /// Proposal rounds until acceptance.
    pub iterations: u64,
    /// Gradient evaluations spent locating the proposal center.
    pub grad_evals: u64,
}

/// Exact RGO draw for an L-smooth potential with η < 1/L, by rejection
/// sampling: minimize g_y(x) = f(x) + ‖x−y‖²/(2η) (β = 1/η − L strongly
/// convex, M = 1/η + L smooth) to ‖∇g‖ ≤ 1e-10, propose Z ~ N(x*, (1/β)I)
/// and accept with probability exp(−g(Z) + g(x*) + (β/2)‖Z−x*‖²) ≤ 1.
pub fn rgo_rejection<R: Rng + ?Sized>(
    p: &Potential,
    y: &DVector<f64>,
    eta: f64,
    rng: &mut R,
) -> Result<RgoSample> {
    let l = p
        .smoothness()
        .ok_or_else(|| Error::capability("rejection RGO needs a known smoothness constant"))?;
    if !(eta > 0.0 && eta < 1.0 / l) {
        return Err(Error::input("rejection RGO requires 0 < eta < 1/L"));
    }
    if y.len() != p.dim() {
        return Err(Error::input("y dimension differs from potential"));
    }
    let beta = 1.0 / eta - l;
    let m = 1.0 / eta + l;
    let g_val = |x: &DVector<f64>| p.value(x) + (x - y).norm_squared() / (2.0 * eta);
    let g_grad = |x: &DVector<f64>| p.grad(x) + (x - y) / eta;

    // gradient descent with the optimal fixed step 2/(β+M)
    let step = 2.0 / (beta + m);
    let mut x = y.clone();
    let mut grad_evals = 0u64;
    let mut converged = false;
    for _ in 0..RGO_MAX_OPT_ITERS {
        let g = g_grad(&x);
        grad_evals += 1;
        check_state(&x, &g)?;
        if g.norm() <= RGO_GRAD_TOL {
            converged = true;
            break;
        }
        x -= step * g;
    }
    if !converged {
        return Err(Error::Optimization(alloc::string::String::from(
            "proposal center did not converge",
        )));
    }
    let x_star = x;
    let g_star = g_val(&x_star);
    let prop_sd = (1.0 / beta).sqrt();
    let mut iterations = 0u64;
    loop {
        iterations += 1;
        let z = &x_star + prop_sd * standard_normal_vector(p.dim(), rng);
        let log_accept = g_star - g_val(&z) + 0.5 * beta * (&z - &x_star).norm_squared();
        if rng.gen::<f64>().ln() < log_accept {
            return Ok(RgoSample { x: z, iterations, grad_evals });
        }
    }
}

/// Simulates a single chain and records X_k at every record point. Pure in
/// `(cfg.seed, chain_index)`, independent of scheduling. Returns the initial
/// state, the recorded states, and the oracle calls spent.
pub fn simulate_chain(
    cfg: &ChainConfig,
    target: &ChainTarget,
    chain_index: u64,
) -> Result<(DVector<f64>, Vec<DVector<f64>>, u64)> {
    let mut rng = chain_rng(cfg.seed, chain_index);
    let x0 = cfg.init.sample(&mut rng);
    let d = x0.len();
    let mut recorded = Vec::with_capacity(cfg.records.len());
    let mut calls = 0u64;

    match (&cfg.kind, &cfg.records) {
        (ChainKind::LangevinEm { em_substep, exact_gaussian }, RecordPoints::Times(times)) => {
            let mut x = x0.clone();
            let mut now = 0.0;
            for &t in times {
                let span = t - now;
                if *exact_gaussian {
                    let g = match target {
                        ChainTarget::Gaussian(g) => g,
                        ChainTarget::Smooth(_) => unreachable!("checked in validate"),
                    };
                    let z = standard_normal_vector(d, &mut rng);
                    x = ou_exact_step(g, &x, span, &z)?;
                } else {
                    let (next, c) = langevin_em(target, &x, span, *em_substep, &mut rng)?;
                    x = next;
                    calls += c;
                }
                now = t;
                recorded.push(x.clone());
            }
        }
        (ChainKind::Ula, RecordPoints::Steps(steps)) => {
            let mut x = x0.clone();
            let mut k = 0u64;
            for &target_k in steps {
                while k < target_k {
                    let z = standard_normal_vector(d, &mut rng);
                    x = ula_step(target, &x, cfg.eta, &z)?;
                    calls += 1;
                    k += 1;
                }
                recorded.push(x.clone());
            }
        }
        (ChainKind::Proximal, RecordPoints::Steps(steps)) => {
            let mut x = x0.clone();
            let mut k = 0u64;
            for &target_k in steps {
                while k < target_k {
                    let y = proximal_forward(&x, cfg.eta, &mut rng)?;
                    match target {
                        ChainTarget::Gaussian(g) => {
                            x = rgo_gaussian_exact(g, &y, cfg.eta, &mut rng)?;
                            calls += 1;
                        }
                        ChainTarget::Smooth(p) => {
                            let s = rgo_rejection(p, &y, cfg.eta, &mut rng)?;
                            calls += s.iterations + s.grad_evals;
                            x = s.x;
                        }
                    }
                    k += 1;
                }
                recorded.push(x.clone());
            }
        }
        _ => unreachable!("record kind checked in validate"),
    }
    Ok((x0, recorded, calls))
}

/// Runs all chains sequentially and assembles the pair arrays. Harnesses
/// wanting parallelism call [`simulate_chain`] per index and merge; both
/// paths produce identical output.
pub fn run_chain_pairs(cfg: &ChainConfig, target: &ChainTarget) -> Result<TrajectorySample> {
    cfg.validate(target)?;
    let n_rec = cfg.records.len();
    let mut pairs: Vec<Vec<(DVector<f64>, DVector<f64>)>> =
        (0..n_rec).map(|_| Vec::with_capacity(cfg.n_chains)).collect();
    let mut oracle_call_count = 0u64;
    let mut stream_ids = Vec::with_capacity(cfg.n_chains);
    for c in 0..cfg.n_chains as u64 {
        let (x0, rec, calls) = simulate_chain(cfg, target, c)?;
        oracle_call_count += calls;
        stream_ids.push(c);
        for (r, xk) in rec.into_iter().enumerate() {
            pairs[r].push((x0.clone(), xk));
        }
    }
    Ok(TrajectorySample { pairs, oracle_call_count, seed: cfg.seed, stream_ids })
}
