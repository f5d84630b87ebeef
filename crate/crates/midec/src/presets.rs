//! Built-in experiment configurations, reproducible by name.

use crate::config::{
    ChainSpec, ExperimentConfig, GaussianSpec, TargetSpec,
};

pub const NAMES: [&str; 4] =
    ["ula-gaussian", "proximal-gaussian", "langevin-gaussian", "ula-logcosh"];

fn scalar_standard_gaussian() -> TargetSpec {
    TargetSpec::Gaussian { mean: vec![0.0], cov: vec![vec![1.0]] }
}

/// Returns the named preset, or `None` for unknown names.
pub fn get(name: &str) -> Option<ExperimentConfig> {
    let cfg = match name {
        "ula-gaussian" => ExperimentConfig {
            target: scalar_standard_gaussian(),
            chain: ChainSpec {
                kind: "ula".into(),
                eta: 0.1,
                em_substep: None,
                exact_gaussian: false,
                record_steps: Some((1..=50).collect()),
                record_times: None,
                n_chains: 100_000,
                seed: 1,
                init: GaussianSpec::scalar(0.0, 1.0),
            },
            generator: "kl".into(),
            reference_index: 1.0,
            bounds: Default::default(),
            tolerances: Default::default(),
            output_dir: "out/ula-gaussian".into(),
            debug_scale_thm_bound: 1.0,
        },
        "proximal-gaussian" => ExperimentConfig {
            target: scalar_standard_gaussian(),
            chain: ChainSpec {
                kind: "proximal".into(),
                eta: 1.0,
                em_substep: None,
                exact_gaussian: false,
                record_steps: Some((1..=20).collect()),
                record_times: None,
                n_chains: 20_000,
                seed: 17,
                init: GaussianSpec::scalar(0.0, 1.0),
            },
            generator: "kl".into(),
            reference_index: 1.0,
            bounds: Default::default(),
            tolerances: Default::default(),
            output_dir: "out/proximal-gaussian".into(),
            debug_scale_thm_bound: 1.0,
        },
        "langevin-gaussian" => ExperimentConfig {
            target: scalar_standard_gaussian(),
            chain: ChainSpec {
                kind: "langevin".into(),
                eta: 0.0,
                em_substep: None,
                exact_gaussian: true,
                record_steps: None,
                record_times: Some((1..=16).map(|i| 0.25 * i as f64).collect()),
                n_chains: 20_000,
                seed: 17,
                init: GaussianSpec::scalar(0.0, 1.0),
            },
            generator: "kl".into(),
            reference_index: 0.25,
            bounds: Default::default(),
            tolerances: Default::default(),
            output_dir: "out/langevin-gaussian".into(),
            debug_scale_thm_bound: 1.0,
        },
        "ula-logcosh" => ExperimentConfig {
            target: TargetSpec::Builtin { name: "logcosh".into(), dim: 1, a: 1.0 },
            chain: ChainSpec {
                kind: "ula".into(),
                eta: 0.25,
                em_substep: None,
                exact_gaussian: false,
                record_steps: Some((1..=30).collect()),
                record_times: None,
                n_chains: 20_000,
                seed: 17,
                init: GaussianSpec::scalar(0.0, 1.0),
            },
            generator: "kl".into(),
            reference_index: 1.0,
            bounds: Default::default(),
            tolerances: Default::default(),
            output_dir: "out/ula-logcosh".into(),
            debug_scale_thm_bound: 1.0,
        },
        _ => return None,
    };
    Some(cfg)
}
