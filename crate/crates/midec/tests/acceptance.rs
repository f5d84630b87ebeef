//! End-to-end acceptance gate: one line of output per criterion, all of
//! them verified against independent closed forms or Monte Carlo.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};

use midec_core::bounds::{
    bound_mi_langevin, bound_mi_langevin_sharp, bound_mi_proximal,
    bound_mi_proximal_first_step, bound_mi_regularity_ld, bound_mi_regularity_ula,
    bound_mi_ula, contraction_forward_heat, iters_proximal, iters_ula,
    sobolev_evolution_proximal, sobolev_evolution_ula,
};
use midec_core::estimation::{joint_gaussian_fit, mi_plugin_bootstrap, mi_plugin_gaussian};
use midec_core::gaussian::{
    ou_mi_exact, proximal_gaussian_mi_exact, ula_gaussian_joint, ula_gaussian_mi_exact,
    JointGaussianState,
};
use midec_core::phi::{
    phi_fisher_info_quadrature_1d, phi_mutual_info_gaussian, PhiKind, SobolevConstant,
};
use midec_core::quad::gauss_hermite;
use midec_core::samplers::{
    rgo_gaussian_mean_cov, rgo_rejection, run_chain_pairs, ChainConfig, ChainKind,
    ChainTarget, RecordPoints,
};
use midec_core::targets::{gaussian_potential, GaussianDist};

const SLACK: f64 = 1e-12;

fn sc(v: f64) -> SobolevConstant {
    SobolevConstant::new(v).unwrap()
}

// ---------------------------------------------------------------- criteria

/// Exact ULA MI at k ∈ {1, 10} matches the joint-law oracle to 1e-12 and the
/// six-decimal reference values.
fn c01_ula_mi_exactness() {
    let init = GaussianDist::standard(1);
    for k in [1u64, 10] {
        let formula = ula_gaussian_mi_exact(1.0, 0.1, k, 1).unwrap();
        let j = ula_gaussian_joint(1.0, 0.1, k, &init).unwrap();
        let oracle = phi_mutual_info_gaussian(&j, PhiKind::Kl).unwrap();
        assert!(
            (formula - oracle).abs() <= 1e-12,
            "k={k}: formula {formula} vs joint oracle {oracle}"
        );
    }
    let v1 = ula_gaussian_mi_exact(1.0, 0.1, 1, 1).unwrap();
    let v10 = ula_gaussian_mi_exact(1.0, 0.1, 10, 1).unwrap();
    assert!((v1 - 0.809681).abs() < 5e-5, "k=1 value {v1}");
    assert!((v10 - 0.061766).abs() < 5e-5, "k=10 value {v10}");
}

/// 10⁵ simulated ULA chains: the Gaussian plug-in MI at k = 10 covers the
/// exact value within its 95% bootstrap interval (single-threaded).
fn c02_ula_monte_carlo() {
    let cfg = ChainConfig {
        kind: ChainKind::Ula,
        eta: 0.1,
        records: RecordPoints::Steps(vec![10]),
        n_chains: 100_000,
        seed: 1,
        init: GaussianDist::standard(1),
    };
    let target = ChainTarget::Gaussian(GaussianDist::standard(1));
    let traj = run_chain_pairs(&cfg, &target).unwrap();
    let (point, halfwidth) = mi_plugin_bootstrap(&traj.pairs[0], cfg.seed).unwrap();
    let exact = ula_gaussian_mi_exact(1.0, 0.1, 10, 1).unwrap();
    assert!(
        (point - exact).abs() <= halfwidth,
        "plug-in {point} ± {halfwidth} does not cover exact {exact}"
    );
}

/// Exact MI never exceeds the theorem bounds, on dense grids for all three
/// chains (reference at the first recorded index).
fn c03_dominance_grids() {
    // ULA: α = 1, η = 0.1, reference ℓ = 1
    let (alpha, eta) = (1.0, 0.1);
    let gamma = 1.0 - eta * alpha;
    let mi_ref = ula_gaussian_mi_exact(alpha, eta, 1, 1).unwrap();
    let a_ref = sobolev_evolution_ula(1.0, gamma, eta).unwrap();
    for k in 1..=200u64 {
        let exact = ula_gaussian_mi_exact(alpha, eta, k, 1).unwrap();
        let bound = bound_mi_ula(alpha, eta, a_ref, mi_ref, k - 1).unwrap();
        assert!(exact <= bound + SLACK, "ULA k={k}: {exact} > {bound}");
    }
    // OU: α = 1, reference s = 0.1, t ∈ {0.1, 0.2, ..., 10}
    let s = 0.1;
    let mi_s = ou_mi_exact(1.0, s, 1).unwrap();
    let a_s = midec_core::bounds::sobolev_evolution_langevin(1.0, sc(1.0), s).unwrap();
    for i in 1..=100u64 {
        let t = 0.1 * i as f64;
        let exact = ou_mi_exact(1.0, t, 1).unwrap();
        let loose = bound_mi_langevin(1.0, a_s, mi_s, t - s).unwrap();
        let sharp = bound_mi_langevin_sharp(1.0, a_s, mi_s, t - s).unwrap();
        assert!(exact <= sharp + SLACK, "OU t={t}: {exact} > sharp {sharp}");
        assert!(sharp <= loose + SLACK, "OU t={t}: sharp {sharp} > loose {loose}");
    }
    // proximal: α = 1, η = 0.5, reference ℓ = 1
    let eta = 0.5;
    let mi_ref = proximal_gaussian_mi_exact(1.0, eta, 1, 1).unwrap();
    let a_ref = sobolev_evolution_proximal(1.0, 1.0, eta).unwrap();
    for k in 1..=100u64 {
        let exact = proximal_gaussian_mi_exact(1.0, eta, k, 1).unwrap();
        let bound = bound_mi_proximal(1.0, eta, a_ref, mi_ref, k - 1).unwrap();
        assert!(exact <= bound + SLACK, "proximal k={k}: {exact} > {bound}");
    }
}

fn ls_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (mx / n, my / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(num, den), (x, y)| {
        (num + (x - mx) * (y - my), den + (x - mx) * (x - mx))
    });
    num / den
}

/// The asymptotic log-MI slope over k ∈ [20, 60] matches the contraction
/// rate: 2·ln(1−ηα) for ULA, −2·ln(1+ηα) for the proximal sampler.
fn c04_log_slope_regression() {
    let pts: Vec<(f64, f64)> = (20..=60)
        .map(|k| (k as f64, ula_gaussian_mi_exact(1.0, 0.1, k, 1).unwrap().ln()))
        .collect();
    let slope = ls_slope(&pts);
    let expect = 2.0 * (0.9f64).ln();
    assert!(
        ((slope - expect) / expect).abs() < 0.01,
        "ULA slope {slope} vs {expect}"
    );
    let pts: Vec<(f64, f64)> = (20..=60)
        .map(|k| (k as f64, proximal_gaussian_mi_exact(1.0, 0.25, k, 1).unwrap().ln()))
        .collect();
    let slope = ls_slope(&pts);
    let expect = -2.0 * (1.25f64).ln();
    assert!(
        ((slope - expect) / expect).abs() < 0.01,
        "proximal slope {slope} vs {expect}"
    );
}

/// de Bruijn identity for the stationary OU pair: the finite-difference MI
/// derivative equals −FI^M with the Fisher information computed by
/// Gauss–Hermite quadrature, to 1e-3 relative.
fn c05_de_bruijn() {
    let (nodes, weights) = gauss_hermite(64);
    let norm = std::f64::consts::PI.sqrt();
    for t in [0.25, 0.5, 1.0] {
        let h = 1e-4;
        let dmi = (ou_mi_exact(1.0, t + h, 1).unwrap() - ou_mi_exact(1.0, t - h, 1).unwrap())
            / (2.0 * h);
        let decay = (-t).exp();
        let tau = 1.0 - decay * decay;
        let marg = GaussianDist::scalar(0.0, 1.0).unwrap();
        let qd = |x: f64| marg.density_1d(x);
        let mut fi_m = 0.0;
        for (&node, &w) in nodes.iter().zip(weights.iter()) {
            let x0 = 2.0_f64.sqrt() * node;
            let cond = GaussianDist::scalar(decay * x0, tau).unwrap();
            let pd = |x: f64| cond.density_1d(x);
            fi_m += w
                * phi_fisher_info_quadrature_1d(PhiKind::Kl, &pd, &qd, -14.0, 14.0, 1e-9)
                    .unwrap();
        }
        fi_m /= norm;
        assert!((dmi + fi_m).abs() <= 1e-3 * fi_m, "t={t}: {dmi} vs {}", -fi_m);
    }
}

/// The Sobolev-constant evolutions have their claimed fixed points, for 100
/// random parameter draws.
fn c06_fixed_points() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(99);
    for _ in 0..100 {
        let alpha: f64 = rng.gen_range(0.1..3.0);
        let eta_ula = rng.gen_range(0.01..0.99) / alpha;
        let star = alpha * (1.0 - eta_ula * alpha / 2.0);
        let mapped = sobolev_evolution_ula(star, 1.0 - eta_ula * alpha, eta_ula)
            .unwrap()
            .value();
        assert!(
            (mapped - star).abs() <= 1e-12 * star.max(1.0),
            "ULA fixed point drifts: {star} -> {mapped}"
        );
        let eta_prox = rng.gen_range(0.05..2.0);
        let mapped = sobolev_evolution_proximal(alpha, alpha, eta_prox).unwrap().value();
        assert!(
            (mapped - alpha).abs() <= 1e-12 * alpha.max(1.0),
            "proximal fixed point drifts: {alpha} -> {mapped}"
        );
    }
}

/// Rejection-sampled restricted Gaussian oracle on a 2-d standard Gaussian
/// (L = 1, η = 0.2): moments within 4 standard errors of the closed form at
/// 10⁵ draws, and the mean proposal count within 10% of the
/// ((1+Lη)/(1−Lη))^{d/2} budget.
fn c07_rgo_rejection() {
    let target = GaussianDist::standard(2);
    let potential = gaussian_potential(&target).unwrap();
    let y = DVector::from_vec(vec![0.3, -0.2]);
    let eta = 0.2;
    let (mean, cov) = rgo_gaussian_mean_cov(&target, &y, eta).unwrap();

    let n = 100_000usize;
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    let mut sum = DVector::zeros(2);
    let mut sq = DMatrix::zeros(2, 2);
    let mut iters = 0u64;
    for _ in 0..n {
        let s = rgo_rejection(&potential, &y, eta, &mut rng).unwrap();
        sum += &s.x;
        sq.ger(1.0, &s.x, &s.x, 1.0);
        iters += s.iterations;
    }
    let nf = n as f64;
    let m_hat = &sum / nf;
    let c_hat = sq / nf - &m_hat * m_hat.transpose();
    for i in 0..2 {
        let se = (cov[(i, i)] / nf).sqrt();
        assert!(
            (m_hat[i] - mean[i]).abs() <= 4.0 * se,
            "mean[{i}] {} vs {} (se {se})",
            m_hat[i],
            mean[i]
        );
        for j in 0..2 {
            let se = ((cov[(i, i)] * cov[(j, j)] + cov[(i, j)].powi(2)) / nf).sqrt();
            assert!(
                (c_hat[(i, j)] - cov[(i, j)]).abs() <= 4.0 * se,
                "cov[({i},{j})] {} vs {}",
                c_hat[(i, j)],
                cov[(i, j)]
            );
        }
    }
    // expected proposal rounds: ((1+Lη)/(1−Lη))^{d/2} = 1.2/0.8 = 1.5
    let mean_iters = iters as f64 / nf;
    assert!(mean_iters <= 1.1 * 1.5, "mean proposal rounds {mean_iters}");
}

/// Cross-covariance bound ‖Cov(X,Y)‖ ≤ ξ√(2·Var·MI): 100 random Gaussian
/// joints plus a joint fitted to simulated OU chains.
fn c08_cov_bound() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(42);
    let check = |j: &JointGaussianState, mi: f64, label: &str| {
        let opnorm = midec_core::linalg::op_norm(&j.cross);
        let xi = midec_core::linalg::sym_eig_max(&j.covk).sqrt();
        let var = midec_core::linalg::sym_eig_max(&j.cov0);
        let bound = xi * (2.0 * var * mi).sqrt();
        assert!(opnorm <= bound + 1e-9, "{label}: ‖cross‖ {opnorm} > bound {bound}");
    };
    for trial in 0..100 {
        let d = rng.gen_range(1..=3usize);
        // random joint via a Gram matrix plus a diagonal bump
        let g = DMatrix::from_fn(2 * d, 2 * d, |_, _| rng.gen_range(-1.0..1.0f64));
        let full = &g * g.transpose() + DMatrix::identity(2 * d, 2 * d) * 0.1;
        let j = JointGaussianState::new(
            DVector::zeros(d),
            DVector::zeros(d),
            full.view((0, 0), (d, d)).into(),
            full.view((d, d), (d, d)).into(),
            full.view((0, d), (d, d)).into(),
        )
        .unwrap();
        let mi = phi_mutual_info_gaussian(&j, PhiKind::Kl).unwrap();
        check(&j, mi, &format!("random joint {trial}"));
    }
    // fitted OU joint
    let cfg = ChainConfig {
        kind: ChainKind::LangevinEm { em_substep: 1e-2, exact_gaussian: true },
        eta: 0.0,
        records: RecordPoints::Times(vec![0.7]),
        n_chains: 5_000,
        seed: 11,
        init: GaussianDist::standard(1),
    };
    let target = ChainTarget::Gaussian(GaussianDist::standard(1));
    let traj = run_chain_pairs(&cfg, &target).unwrap();
    let j = joint_gaussian_fit(&traj.pairs[0]).unwrap();
    let mi = mi_plugin_gaussian(&j).unwrap();
    check(&j, mi, "fitted OU joint");
}

/// The unconditional regularity bounds dominate the exact MI on dense grids.
fn c09_regularity_dominates() {
    for k in 1..=100u64 {
        let exact = ula_gaussian_mi_exact(1.0, 0.1, k, 1).unwrap();
        let bound = bound_mi_regularity_ula(1.0, 0.1, k, 1.0).unwrap();
        assert!(exact <= bound + SLACK, "ULA k={k}: {exact} > {bound}");
    }
    for i in 1..=100u64 {
        let t = 0.05 * i as f64;
        let exact = ou_mi_exact(1.0, t, 1).unwrap();
        let bound = bound_mi_regularity_ld(1.0, t, 1.0).unwrap();
        assert!(exact <= bound + SLACK, "OU t={t}: {exact} > {bound}");
    }
    for eta in [0.25, 0.5, 1.0, 2.0] {
        let exact = proximal_gaussian_mi_exact(1.0, eta, 1, 1).unwrap();
        let bound = bound_mi_proximal_first_step(eta, 1.0).unwrap();
        assert!(exact <= bound + SLACK, "proximal η={eta}: {exact} > {bound}");
    }
}

/// Every closed-form arithmetic example reproduces an independently coded
/// expression to 1e-9.
fn c10_arithmetic_examples() {
    let close = |got: f64, want: f64, label: &str| {
        assert!((got - want).abs() <= 1e-9, "{label}: {got} vs {want}");
    };

    // proximal bound at α = 1, η = 1, Sobolev 2, MI 1, two steps: 1/(1+1·min(1,2))⁴
    close(bound_mi_proximal(1.0, 1.0, sc(2.0), 1.0, 2).unwrap(), 1.0 / 16.0, "proximal 2-step");
    // ULA one-step bound with matched Sobolev constant: (1−ηα)² · MI
    close(bound_mi_ula(1.0, 0.1, sc(1.0), 1.0, 1).unwrap(), 0.81, "ULA 1-step");
    // Langevin bound at matched constant: e^{−2αt} · MI
    close(
        bound_mi_langevin(1.0, sc(1.0), 1.0, 0.5).unwrap(),
        (-1.0f64).exp(),
        "langevin matched",
    );
    // iteration complexities: ℓ + ⌈ln(MI/ε)/(2αη)⌉ and ℓ + ⌈(½+1/(2η·min))ln(MI/ε)⌉
    assert_eq!(iters_ula(0.01, 1.0, 0.1, sc(1.0), 1.0, 3).unwrap(), 3 + 24);
    assert_eq!(iters_proximal(0.01, 1.0, 1.0, sc(1.0), 1.0, 3).unwrap(), 3 + 5);
    // stationary OU MI from the correlation ρ = e^{−t}: −½ln(1−ρ²)
    let rho = (-1.0f64).exp();
    close(ou_mi_exact(1.0, 1.0, 1).unwrap(), -0.5 * (1.0 - rho * rho).ln(), "OU MI t=1");
    // ULA exact MI vs a brute-force moment recursion
    let (mut v, mut c) = (1.0f64, 1.0f64);
    let gamma = 0.9;
    for _ in 0..10 {
        v = gamma * gamma * v + 2.0 * 0.1;
        c *= gamma;
    }
    close(
        ula_gaussian_mi_exact(1.0, 0.1, 10, 1).unwrap(),
        -0.5 * (1.0 - c * c / v).ln(),
        "ULA MI vs recursion",
    );
    // proximal exact MI vs a brute-force moment recursion (forward heat step
    // then the exact restricted Gaussian oracle)
    let (alpha, eta) = (1.0, 0.5);
    let r = 1.0 + alpha * eta;
    let (mut v, mut c) = (1.0f64, 1.0f64);
    for _ in 0..2 {
        v = (v + eta) / (r * r) + eta / r;
        c /= r;
    }
    close(
        proximal_gaussian_mi_exact(alpha, eta, 2, 1).unwrap(),
        -0.5 * (1.0 - c * c / v).ln(),
        "proximal MI vs recursion",
    );
    // forward heat contraction at η·α_ρ = 1
    close(contraction_forward_heat(1.0, 1.0).unwrap(), 0.5, "forward heat");
    // ULA Sobolev fixed point at α = 1, η = 0.1: 0.95/(0.81 + 0.2·0.95)
    close(
        sobolev_evolution_ula(0.95, 0.9, 0.1).unwrap().value(),
        0.95 / (0.81 + 0.2 * 0.95),
        "ULA Sobolev map",
    );
    // ULA regularity at k = 1: α·var0/((1−ηα)^{−2}−1)
    close(
        bound_mi_regularity_ula(1.0, 0.1, 1, 1.0).unwrap(),
        1.0 / (1.0 / 0.81 - 1.0),
        "ULA regularity k=1",
    );
}

// ------------------------------------------------------------------ driver

#[test]
fn acceptance() {
    let criteria: Vec<(&str, Duration, Box<dyn Fn() + std::panic::RefUnwindSafe>)> = vec![
        ("01 ULA Gaussian MI oracle exactness", Duration::from_secs(1), Box::new(c01_ula_mi_exactness)),
        ("02 ULA Monte Carlo plug-in MI coverage", Duration::from_secs(60), Box::new(c02_ula_monte_carlo)),
        ("03 theorem bounds dominate exact MI", Duration::from_secs(5), Box::new(c03_dominance_grids)),
        ("04 asymptotic log-MI slope", Duration::from_secs(5), Box::new(c04_log_slope_regression)),
        ("05 de Bruijn identity (quadrature)", Duration::from_secs(10), Box::new(c05_de_bruijn)),
        ("06 Sobolev evolution fixed points", Duration::from_secs(1), Box::new(c06_fixed_points)),
        ("07 rejection RGO moments and cost", Duration::from_secs(60), Box::new(c07_rgo_rejection)),
        ("08 cross-covariance bounded by MI", Duration::from_secs(10), Box::new(c08_cov_bound)),
        ("09 regularity bounds dominate exact MI", Duration::from_secs(5), Box::new(c09_regularity_dominates)),
        ("10 arithmetic examples vs independent oracles", Duration::from_secs(5), Box::new(c10_arithmetic_examples)),
    ];

    let mut failed = Vec::new();
    for (name, budget, run) in &criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run));
        let elapsed = start.elapsed();
        let ok = result.is_ok() && elapsed <= *budget;
        println!(
            "criterion {name}: {} ({:.2}s, budget {}s)",
            if ok { "pass" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        if !ok {
            if elapsed > *budget {
                failed.push(format!("{name}: over budget ({elapsed:?})"));
            }
            if let Err(payload) = result {
                let msg = payload
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".to_string());
                failed.push(format!("{name}: {msg}"));
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
