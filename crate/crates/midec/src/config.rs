//! Experiment configuration: JSON schema and resolution into a validated
//! plan. Everything is checked up front so a run either starts with a fully
//! resolved plan or fails with a field-level error before any computation.

use anyhow::{bail, Context, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use midec_core::phi::PhiKind;
use midec_core::samplers::{ChainConfig, ChainKind, ChainTarget, RecordPoints};
use midec_core::targets::{logcosh_potential, GaussianDist};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub mean: Vec<f64>,
    /// Row-major covariance.
    pub cov: Vec<Vec<f64>>,
}

impl GaussianSpec {
    pub fn build(&self, what: &str) -> Result<GaussianDist> {
        let d = self.mean.len();
        if self.cov.len() != d || self.cov.iter().any(|r| r.len() != d) {
            bail!("{what}: covariance must be {d}x{d} to match the mean");
        }
        let mean = DVector::from_vec(self.mean.clone());
        let cov = DMatrix::from_fn(d, d, |i, j| self.cov[i][j]);
        GaussianDist::new(mean, cov).with_context(|| format!("{what}: invalid Gaussian"))
    }

    pub fn scalar(m: f64, v: f64) -> Self {
        Self { mean: vec![m], cov: vec![vec![v]] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TargetSpec {
    Gaussian {
        mean: Vec<f64>,
        cov: Vec<Vec<f64>>,
    },
    /// Registered non-Gaussian test potentials; currently `logcosh`
    /// (f = Σ a·x²/2 + log cosh x, a-SLC and (a+1)-smooth).
    Builtin {
        name: String,
        dim: usize,
        #[serde(default = "default_a")]
        a: f64,
    },
}

fn default_a() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainSpec {
    /// "langevin", "ula" or "proximal".
    pub kind: String,
    #[serde(default)]
    pub eta: f64,
    /// Euler–Maruyama substep for langevin; ignored when `exact_gaussian`.
    #[serde(default)]
    pub em_substep: Option<f64>,
    /// Use the exact transition law on Gaussian targets (langevin only).
    #[serde(default)]
    pub exact_gaussian: bool,
    /// Record grid for the discrete chains.
    #[serde(default)]
    pub record_steps: Option<Vec<u64>>,
    /// Record grid for langevin.
    #[serde(default)]
    pub record_times: Option<Vec<f64>>,
    pub n_chains: usize,
    pub seed: u64,
    pub init: GaussianSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundFlags {
    #[serde(default = "yes")]
    pub theorem: bool,
    #[serde(default = "yes")]
    pub regularity: bool,
    #[serde(default = "yes")]
    pub covariance: bool,
}

fn yes() -> bool {
    true
}

impl Default for BoundFlags {
    fn default() -> Self {
        Self { theorem: true, regularity: true, covariance: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(default = "default_mc_sigma")]
    pub mc_sigma: f64,
    #[serde(default = "default_slack")]
    pub dominance_slack: f64,
}

fn default_mc_sigma() -> f64 {
    4.0
}

fn default_slack() -> f64 {
    1e-9
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { mc_sigma: default_mc_sigma(), dominance_slack: default_slack() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub target: TargetSpec,
    pub chain: ChainSpec,
    /// Divergence generator name ("kl", "chi2", ...).
    #[serde(default = "default_generator")]
    pub generator: String,
    /// Reference step ℓ (discrete chains) or time s (langevin) for the
    /// theorem bounds.
    pub reference_index: f64,
    #[serde(default)]
    pub bounds: BoundFlags,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub output_dir: String,
    /// Test hook: multiplies the theorem bounds before verification, so the
    /// violation path can be exercised deliberately. Leave at 1.
    #[serde(default = "default_scale")]
    pub debug_scale_thm_bound: f64,
}

fn default_generator() -> String {
    "kl".to_string()
}

fn default_scale() -> f64 {
    1.0
}

/// A fully-resolved experiment: validated target, chain config, generator
/// and verification knobs.
pub struct Plan {
    pub target: ChainTarget,
    pub chain: ChainConfig,
    pub generator: PhiKind,
    /// Reference step (discrete) — `reference_index` rounded.
    pub reference_step: u64,
    /// Reference time (langevin).
    pub reference_time: f64,
    pub bounds: BoundFlags,
    pub tolerances: Tolerances,
    pub output_dir: String,
    pub debug_scale_thm_bound: f64,
    /// Strong-log-concavity constant of the target (1/λ_max for Gaussians).
    pub alpha: f64,
    /// Sobolev constant of the initialization.
    pub alpha0: f64,
    /// Total initial variance (trace of the init covariance).
    pub var0: f64,
    /// Present when exact Gaussian oracles apply: per-coordinate target
    /// curvatures 1/λᵢ (in the covariance eigenbasis) and the isotropic
    /// initialization variance.
    pub oracle: Option<OracleSetup>,
}

pub struct OracleSetup {
    pub alphas: Vec<f64>,
    pub init_var: f64,
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))
    }

    pub fn resolve(&self) -> Result<Plan> {
        let target = match &self.target {
            TargetSpec::Gaussian { mean, cov } => {
                let g = GaussianSpec { mean: mean.clone(), cov: cov.clone() }.build("target")?;
                ChainTarget::Gaussian(g)
            }
            TargetSpec::Builtin { name, dim, a } => match name.as_str() {
                "logcosh" => ChainTarget::Smooth(
                    logcosh_potential(*dim, *a).context("target: logcosh")?,
                ),
                other => bail!("target: unknown builtin potential {other:?}"),
            },
        };
        let generator = PhiKind::parse(&self.generator)
            .map_err(|e| anyhow::anyhow!("generator: {e}"))?;

        let init = self.chain.init.build("chain.init")?;
        let kind = match self.chain.kind.as_str() {
            "langevin" => ChainKind::LangevinEm {
                em_substep: self.chain.em_substep.unwrap_or(1e-3),
                exact_gaussian: self.chain.exact_gaussian,
            },
            "ula" => ChainKind::Ula,
            "proximal" => ChainKind::Proximal,
            other => bail!("chain.kind: unknown chain {other:?}"),
        };
        let records = match (&kind, &self.chain.record_steps, &self.chain.record_times) {
            (ChainKind::LangevinEm { .. }, None, Some(t)) => RecordPoints::Times(t.clone()),
            (ChainKind::Ula | ChainKind::Proximal, Some(s), None) => {
                RecordPoints::Steps(s.clone())
            }
            (ChainKind::LangevinEm { .. }, _, _) => {
                bail!("chain: langevin requires record_times (and no record_steps)")
            }
            _ => bail!("chain: discrete chains require record_steps (and no record_times)"),
        };
        let chain = ChainConfig {
            kind,
            eta: self.chain.eta,
            records,
            n_chains: self.chain.n_chains,
            seed: self.chain.seed,
            init,
        };
        chain
            .validate(&target)
            .map_err(|e| anyhow::anyhow!("chain: {e}"))?;

        if !(self.reference_index >= 0.0 && self.reference_index.is_finite()) {
            bail!("reference_index: must be finite and nonnegative");
        }
        if !(self.debug_scale_thm_bound > 0.0) {
            bail!("debug_scale_thm_bound: must be positive");
        }

        let alpha = match &target {
            ChainTarget::Gaussian(g) => 1.0 / g.cov_max_eigenvalue(),
            ChainTarget::Smooth(p) => p.alpha(),
        };
        let alpha0 = 1.0 / chain.init.cov_max_eigenvalue();
        let var0 = chain.init.total_variance();
        // Exact oracles need a Gaussian target with an isotropic start: in
        // the target eigenbasis the coordinates then decouple into scalar
        // chains with curvatures 1/λᵢ.
        let oracle = match (&target, chain.init.isotropic_variance()) {
            (ChainTarget::Gaussian(g), Some(init_var)) => Some(OracleSetup {
                alphas: g.cov_eigenvalues().iter().map(|l| 1.0 / l).collect(),
                init_var,
            }),
            _ => None,
        };

        Ok(Plan {
            target,
            chain,
            generator,
            reference_step: self.reference_index.round() as u64,
            reference_time: self.reference_index,
            bounds: self.bounds.clone(),
            tolerances: self.tolerances.clone(),
            output_dir: self.output_dir.clone(),
            debug_scale_thm_bound: self.debug_scale_thm_bound,
            alpha,
            alpha0,
            var0,
            oracle,
        })
    }
}
