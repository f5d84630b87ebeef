//! Empirical mutual information and covariance from recorded chain pairs.
//!
//! The workhorse is the Gaussian plug-in: fit a joint Gaussian to the
//! (X₀, X_k) pairs and evaluate the closed-form MI of the fit. On the
//! Gaussian desk-scale targets the joint really is Gaussian, so the plug-in
//! is consistent; on anything else it is a heuristic and callers should say
//! so. A 1-d histogram Φ-MI estimator is included as a diagnostic.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::gaussian::JointGaussianState;
use crate::linalg;
use crate::phi::{self, PhiKind};
use crate::rng::aux_rng;

/// Relative ridge added to the diagonal covariance blocks before inversion.
const RIDGE_REL: f64 = 1e-12;
/// Bootstrap replicates for the plug-in confidence interval.
const BOOTSTRAP_REPLICATES: usize = 200;

/// Running first and second moments of (x0, xk) pairs. Partial accumulators
/// over disjoint chain ranges can be merged; merge order only perturbs the
/// result at round-off level.
#[derive(Debug, Clone)]
pub struct MomentAccumulator {
    d: usize,
    count: u64,
    sum0: DVector<f64>,
    sumk: DVector<f64>,
    s00: DMatrix<f64>,
    skk: DMatrix<f64>,
    s0k: DMatrix<f64>,
}

impl MomentAccumulator {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            count: 0,
            sum0: DVector::zeros(d),
            sumk: DVector::zeros(d),
            s00: DMatrix::zeros(d, d),
            skk: DMatrix::zeros(d, d),
            s0k: DMatrix::zeros(d, d),
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn push(&mut self, x0: &DVector<f64>, xk: &DVector<f64>) {
        self.count += 1;
        self.sum0 += x0;
        self.sumk += xk;
        self.s00.ger(1.0, x0, x0, 1.0);
        self.skk.ger(1.0, xk, xk, 1.0);
        self.s0k.ger(1.0, x0, xk, 1.0);
    }

    pub fn merge(&mut self, other: &MomentAccumulator) {
        assert_eq!(self.d, other.d, "dimension mismatch in accumulator merge");
        self.count += other.count;
        self.sum0 += &other.sum0;
        self.sumk += &other.sumk;
        self.s00 += &other.s00;
        self.skk += &other.skk;
        self.s0k += &other.s0k;
    }

    /// Unbiased sample means and covariances with symmetrized diagonal
    /// blocks and a relative ridge (floored at 1e-12 absolute so constant
    /// samples stay invertible downstream). Needs at least d+2 pairs.
    pub fn fit(&self) -> Result<JointGaussianState> {
        let d = self.d;
        if self.count < d as u64 + 2 {
            return Err(Error::input("need at least d+2 pairs to fit a joint Gaussian"));
        }
        let n = self.count as f64;
        let mean0 = &self.sum0 / n;
        let meank = &self.sumk / n;
        let denom = n - 1.0;
        let mut cov0 = (&self.s00 - n * &mean0 * mean0.transpose()) / denom;
        let mut covk = (&self.skk - n * &meank * meank.transpose()) / denom;
        let cross = (&self.s0k - n * &mean0 * meank.transpose()) / denom;
        cov0 = 0.5 * (&cov0 + cov0.transpose());
        covk = 0.5 * (&covk + covk.transpose());
        let ridge0 = (RIDGE_REL * cov0.trace() / d as f64).max(RIDGE_REL);
        let ridgek = (RIDGE_REL * covk.trace() / d as f64).max(RIDGE_REL);
        for i in 0..d {
            cov0[(i, i)] += ridge0;
            covk[(i, i)] += ridgek;
        }
        JointGaussianState::new(mean0, meank, cov0, covk, cross)
    }
}

/// Fits a joint Gaussian to a slice of (x0, xk) pairs.
pub fn joint_gaussian_fit(pairs: &[(DVector<f64>, DVector<f64>)]) -> Result<JointGaussianState> {
    if pairs.is_empty() {
        return Err(Error::input("no pairs to fit"));
    }
    let mut acc = MomentAccumulator::new(pairs[0].0.len());
    for (x0, xk) in pairs {
        acc.push(x0, xk);
    }
    acc.fit()
}

/// Plug-in Gaussian mutual information of a (fitted or exact) joint:
/// −½ log det(I − C) with C the squared canonical-correlation matrix.
/// Returns `+inf` when a canonical correlation reaches 1.
pub fn mi_plugin_gaussian(joint: &JointGaussianState) -> Result<f64> {
    phi::phi_mutual_info_gaussian(joint, PhiKind::Kl)
}

/// Plug-in MI with a nonparametric bootstrap confidence interval: resamples
/// the chains with replacement `BOOTSTRAP_REPLICATES` times and reports the
/// point estimate together with the 95% percentile halfwidth. Replicates
/// whose fit degenerates to infinite MI widen the interval honestly.
pub fn mi_plugin_bootstrap(
    pairs: &[(DVector<f64>, DVector<f64>)],
    seed: u64,
) -> Result<(f64, f64)> {
    let point = mi_plugin_gaussian(&joint_gaussian_fit(pairs)?)?;
    let n = pairs.len();
    let d = pairs[0].0.len();
    let mut reps = Vec::with_capacity(BOOTSTRAP_REPLICATES);
    for r in 0..BOOTSTRAP_REPLICATES {
        let mut rng = aux_rng(seed, r as u64);
        let mut acc = MomentAccumulator::new(d);
        for _ in 0..n {
            let i = rng.gen_range(0..n);
            acc.push(&pairs[i].0, &pairs[i].1);
        }
        reps.push(mi_plugin_gaussian(&acc.fit()?)?);
    }
    reps.sort_by(|a, b| a.partial_cmp(b).expect("NaN bootstrap replicate"));
    let q = |p: f64| reps[(p * (reps.len() - 1) as f64).round() as usize];
    Ok((point, 0.5 * (q(0.975) - q(0.025))))
}

/// Largest singular value of the fitted cross-covariance block.
pub fn empirical_cov_opnorm(joint: &JointGaussianState) -> f64 {
    linalg::op_norm(&joint.cross)
}

/// Histogram plug-in for the Φ-mutual information of scalar pairs: bins the
/// samples on a `bins`×`bins` grid and evaluates D_Φ of the joint histogram
/// against the product of its marginals, with the convention 0·Φ(0/0) = 0.
///
/// Diagnostic only: positively biased at finite n, and divergent in `bins`
/// for degenerate (deterministic) dependence.
pub fn phi_mi_histogram_1d(
    pairs: &[(DVector<f64>, DVector<f64>)],
    bins: usize,
    kind: PhiKind,
) -> Result<f64> {
    if !(16..=512).contains(&bins) {
        return Err(Error::input("bins must lie in [16, 512]"));
    }
    if pairs.is_empty() {
        return Err(Error::input("no pairs to bin"));
    }
    if pairs[0].0.len() != 1 {
        return Err(Error::capability("histogram MI estimator is 1-d only"));
    }
    let xs: Vec<f64> = pairs.iter().map(|(a, _)| a[0]).collect();
    let ys: Vec<f64> = pairs.iter().map(|(_, b)| b[0]).collect();
    let edges = |v: &[f64]| -> Result<(f64, f64)> {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::input("nonfinite sample"));
        }
        // widen degenerate ranges so the single value falls in a bin
        let span = (hi - lo).max(1e-12);
        Ok((lo, span * (1.0 + 1e-9)))
    };
    let (x_lo, x_span) = edges(&xs)?;
    let (y_lo, y_span) = edges(&ys)?;
    let idx = |v: f64, lo: f64, span: f64| (((v - lo) / span * bins as f64) as usize).min(bins - 1);

    let n = pairs.len() as f64;
    let mut grid = alloc::vec![0.0f64; bins * bins];
    let mut px = alloc::vec![0.0f64; bins];
    let mut py = alloc::vec![0.0f64; bins];
    for (&x, &y) in xs.iter().zip(ys.iter()) {
        let (i, j) = (idx(x, x_lo, x_span), idx(y, y_lo, y_span));
        grid[i * bins + j] += 1.0 / n;
        px[i] += 1.0 / n;
        py[j] += 1.0 / n;
    }
    let mut total = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            let q = px[i] * py[j];
            if q == 0.0 {
                continue; // 0·Φ(0/0) = 0
            }
            let p = grid[i * bins + j];
            if p == 0.0 {
                if kind == PhiKind::Kl {
                    continue; // x·log x → 0 as x → 0
                }
                if kind.singular_at_zero() {
                    return Ok(f64::INFINITY);
                }
            }
            total += q * kind.value(p / q)?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{ou_joint, ou_mi_exact, ula_gaussian_joint};
    use crate::rng::chain_rng;
    use crate::samplers::{
        run_chain_pairs, ChainConfig, ChainKind, ChainTarget, RecordPoints,
    };
    use crate::targets::GaussianDist;
    use approx::assert_relative_eq;
    use nalgebra::dvector;
    use rand_distr::StandardNormal;

    #[test]
    fn merge_matches_single_pass() {
        let mut rng = chain_rng(1, 0);
        let pairs: Vec<(DVector<f64>, DVector<f64>)> = (0..500)
            .map(|_| {
                let x: f64 = rng.sample(StandardNormal);
                let e: f64 = rng.sample(StandardNormal);
                (dvector![x], dvector![0.5 * x + e])
            })
            .collect();
        let mut whole = MomentAccumulator::new(1);
        for (a, b) in &pairs {
            whole.push(a, b);
        }
        let mut left = MomentAccumulator::new(1);
        let mut right = MomentAccumulator::new(1);
        for (i, (a, b)) in pairs.iter().enumerate() {
            if i < 123 { left.push(a, b) } else { right.push(a, b) }
        }
        left.merge(&right);
        let jw = whole.fit().unwrap();
        let jm = left.fit().unwrap();
        assert_relative_eq!(jw.cov0[(0, 0)], jm.cov0[(0, 0)], max_relative = 1e-10);
        assert_relative_eq!(jw.cross[(0, 0)], jm.cross[(0, 0)], max_relative = 1e-10);
        assert_relative_eq!(jw.mean0[0], jm.mean0[0], max_relative = 1e-10, epsilon = 1e-12);
    }

    #[test]
    fn constant_samples_leave_only_the_ridge() {
        let pairs: Vec<_> = (0..10).map(|_| (dvector![3.0], dvector![-1.0])).collect();
        let j = joint_gaussian_fit(&pairs).unwrap();
        assert_eq!(j.mean0[0], 3.0);
        assert_eq!(j.meank[0], -1.0);
        assert!(j.cov0[(0, 0)] > 0.0 && j.cov0[(0, 0)] < 1e-11);
        assert_eq!(j.cross[(0, 0)], 0.0);
        // and the plug-in MI of an independent (zero-cross) fit is 0
        assert_eq!(mi_plugin_gaussian(&j).unwrap(), 0.0);
    }

    #[test]
    fn perfect_dependence_makes_cross_equal_cov0() {
        let mut rng = chain_rng(2, 0);
        let pairs: Vec<(DVector<f64>, DVector<f64>)> = (0..200)
            .map(|_| {
                let x: f64 = rng.sample(StandardNormal);
                (dvector![x], dvector![x])
            })
            .collect();
        let j = joint_gaussian_fit(&pairs).unwrap();
        // the ridge only touches the diagonal blocks
        assert_relative_eq!(
            j.cross[(0, 0)],
            j.cov0[(0, 0)] - 1e-12 * j.cov0[(0, 0)].max(1.0),
            max_relative = 1e-9
        );
        // near-unit correlation → very large (or infinite) plug-in MI
        assert!(mi_plugin_gaussian(&j).unwrap() > 10.0);
    }

    #[test]
    fn too_few_samples_rejected() {
        let pairs: Vec<_> = (0..2).map(|i| (dvector![i as f64], dvector![0.0])).collect();
        assert!(joint_gaussian_fit(&pairs).is_err());
    }

    #[test]
    fn ou_pairs_recover_the_cross_covariance() {
        // α=1, t=ln 2, init N(0,1): Cov(X₀, X_t) = e^{−t} = 0.5.
        let cfg = ChainConfig {
            kind: ChainKind::LangevinEm { em_substep: 0.0, exact_gaussian: true },
            eta: 0.0,
            records: RecordPoints::Times(alloc::vec![2.0_f64.ln()]),
            n_chains: 100_000,
            seed: 7,
            init: GaussianDist::scalar(0.0, 1.0).unwrap(),
        };
        let target = ChainTarget::Gaussian(GaussianDist::scalar(0.0, 1.0).unwrap());
        let out = run_chain_pairs(&cfg, &target).unwrap();
        let j = joint_gaussian_fit(&out.pairs[0]).unwrap();
        let se = 1.0 / (cfg.n_chains as f64).sqrt();
        assert!((j.cross[(0, 0)] - 0.5).abs() < 3.0 * se, "cross {}", j.cross[(0, 0)]);
        let exact = ou_joint(1.0, &cfg.init, 2.0_f64.ln()).unwrap();
        assert_relative_eq!(exact.cross[(0, 0)], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn plugin_on_exact_joints_equals_closed_form() {
        for i in 1..=20 {
            let t = 0.2 * i as f64;
            let j = ou_joint(1.0, &GaussianDist::scalar(0.0, 1.0).unwrap(), t).unwrap();
            assert_relative_eq!(
                mi_plugin_gaussian(&j).unwrap(),
                ou_mi_exact(1.0, t, 1).unwrap(),
                epsilon = 1e-12
            );
        }
        // 100 random scalar joints against −½ log(1−ρ²)
        let mut rng = chain_rng(3, 0);
        for _ in 0..100 {
            let v0 = 0.2 + 2.0 * rng.gen::<f64>();
            let vk = 0.2 + 2.0 * rng.gen::<f64>();
            let rho: f64 = 1.8 * rng.gen::<f64>() - 0.9;
            let cross = rho * (v0 * vk).sqrt();
            let j = JointGaussianState::scalar(
                rng.gen::<f64>(),
                v0,
                rng.gen::<f64>(),
                vk,
                cross,
            )
            .unwrap();
            let expect = -0.5 * (1.0 - rho * rho).ln();
            let mi = mi_plugin_gaussian(&j).unwrap();
            assert_relative_eq!(mi, expect, epsilon = 1e-12, max_relative = 1e-12);
            assert!(mi >= 0.0);
            // symmetric in the two blocks
            assert_relative_eq!(
                mi_plugin_gaussian(&j.swapped()).unwrap(),
                mi,
                epsilon = 1e-12,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn bootstrap_covers_the_truth_and_shrinks() {
        let run = |n_chains: usize, seed: u64| {
            let cfg = ChainConfig {
                kind: ChainKind::Ula,
                eta: 0.1,
                records: RecordPoints::Steps(alloc::vec![10]),
                n_chains,
                seed,
                init: GaussianDist::scalar(0.0, 1.0).unwrap(),
            };
            let target = ChainTarget::Gaussian(GaussianDist::scalar(0.0, 1.0).unwrap());
            let out = run_chain_pairs(&cfg, &target).unwrap();
            mi_plugin_bootstrap(&out.pairs[0], seed).unwrap()
        };
        let truth =
            mi_plugin_gaussian(&ula_gaussian_joint(1.0, 0.1, 10, &GaussianDist::scalar(0.0, 1.0).unwrap()).unwrap())
                .unwrap();
        // average CI halfwidths over a few seeds to damp bootstrap noise
        let (mut w1, mut w2, mut covered) = (0.0, 0.0, 0);
        let reps = 4;
        for s in 0..reps {
            let (v, w) = run(4_000, 100 + s);
            if (v - truth).abs() <= w {
                covered += 1;
            }
            w1 += w;
            let (_, w) = run(8_000, 200 + s);
            w2 += w;
        }
        assert!(covered >= reps - 1, "coverage {covered}/{reps}");
        let ratio = (w2 / w1) * 2.0_f64.sqrt();
        assert!((ratio - 1.0).abs() < 0.2, "shrink ratio {ratio}");
    }

    #[test]
    fn cross_covariance_opnorm() {
        let j = JointGaussianState::scalar(0.0, 1.0, 0.0, 1.0, -0.3).unwrap();
        assert_relative_eq!(empirical_cov_opnorm(&j), 0.3, epsilon = 1e-14);
        let j0 = JointGaussianState::scalar(0.0, 1.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(empirical_cov_opnorm(&j0), 0.0);
        // random 3×3 cross against a power-iteration oracle
        let mut rng = chain_rng(4, 0);
        let cross = DMatrix::from_fn(3, 3, |_, _| 0.3 * rng.gen::<f64>() - 0.15);
        let cov = DMatrix::identity(3, 3) * 2.0;
        let j = JointGaussianState::new(
            DVector::zeros(3),
            DVector::zeros(3),
            cov.clone(),
            cov,
            cross.clone(),
        )
        .unwrap();
        let mut v = DVector::from_element(3, 1.0);
        let m = cross.transpose() * &cross;
        for _ in 0..200 {
            v = &m * v;
            v /= v.norm();
        }
        let oracle = (v.transpose() * &m * &v)[(0, 0)].sqrt();
        assert_relative_eq!(empirical_cov_opnorm(&j), oracle, epsilon = 1e-10);
    }

    fn gaussian_pairs(rho: f64, n: usize, seed: u64) -> Vec<(DVector<f64>, DVector<f64>)> {
        let mut rng = chain_rng(seed, 0);
        (0..n)
            .map(|_| {
                let x: f64 = rng.sample(StandardNormal);
                let e: f64 = rng.sample(StandardNormal);
                (dvector![x], dvector![rho * x + (1.0 - rho * rho).sqrt() * e])
            })
            .collect()
    }

    #[test]
    fn histogram_mi_near_zero_for_independent_pairs() {
        let pairs = gaussian_pairs(0.0, 100_000, 5);
        let v = phi_mi_histogram_1d(&pairs, 64, PhiKind::Kl).unwrap();
        assert!(v >= 0.0 && v <= 0.05, "independent KL estimate {v}");
    }

    #[test]
    fn histogram_mi_matches_gaussian_value_at_moderate_correlation() {
        // scalar Gaussian MI at ρ=0.5 is −½ ln(0.75) ≈ 0.143841
        let pairs = gaussian_pairs(0.5, 100_000, 6);
        let v = phi_mi_histogram_1d(&pairs, 64, PhiKind::Kl).unwrap();
        assert!((v - 0.143841).abs() < 0.05, "estimate {v}");
    }

    #[test]
    fn histogram_mi_diverges_with_bins_for_deterministic_dependence() {
        let pairs: Vec<_> = gaussian_pairs(0.0, 20_000, 8)
            .into_iter()
            .map(|(x, _)| (x.clone(), x))
            .collect();
        let mut last = 0.0;
        for bins in [32, 64, 128] {
            let v = phi_mi_histogram_1d(&pairs, bins, PhiKind::Kl).unwrap();
            assert!(v > last, "bins {bins}: {v} not above {last}");
            last = v;
        }
    }

    #[test]
    fn histogram_rejects_bad_inputs() {
        let pairs = gaussian_pairs(0.0, 100, 9);
        assert!(phi_mi_histogram_1d(&pairs, 8, PhiKind::Kl).is_err());
        assert!(phi_mi_histogram_1d(&pairs, 1024, PhiKind::Kl).is_err());
        let pairs2: Vec<_> = (0..10)
            .map(|_| (DVector::zeros(2), DVector::zeros(2)))
            .collect();
        assert!(phi_mi_histogram_1d(&pairs2, 64, PhiKind::Kl).is_err());
    }
}
