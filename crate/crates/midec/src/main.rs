use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Result};
use clap::{Parser, Subcommand};

use midec::config::ExperimentConfig;
use midec::{presets, runner};
use midec_core::bounds;
use midec_core::gaussian::{ou_mi_exact, proximal_gaussian_mi_exact, ula_gaussian_mi_exact};
use midec_core::phi::SobolevConstant;

#[derive(Parser)]
#[command(name = "midec", about = "Mutual-information decay bounds for sampling chains")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment from a config file or a named preset and write
    /// report.csv / summary.json.
    Run {
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Override the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the theorem decay bound step by step.
    Bounds {
        #[arg(long, value_parser = ["langevin", "ula", "proximal"])]
        chain: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        eta: f64,
        /// Sobolev constant of the law at the reference index.
        #[arg(long)]
        sobolev: f64,
        /// Mutual information at the reference index.
        #[arg(long)]
        mi_ref: f64,
        #[arg(long)]
        steps: u64,
    },
    /// Print the exact Gaussian mutual information (standard Gaussian
    /// initialization, target N(0, (1/alpha)I)).
    Oracle {
        #[arg(long, value_parser = ["langevin", "ula", "proximal"])]
        chain: String,
        #[arg(long)]
        alpha: f64,
        /// Iteration count, or elapsed time for langevin.
        #[arg(long)]
        k: f64,
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
    /// Inspect the built-in presets.
    Presets {
        #[command(subcommand)]
        cmd: PresetsCmd,
    },
}

#[derive(Subcommand)]
enum PresetsCmd {
    /// List the preset names.
    List,
}

fn cmd_run(config: Option<PathBuf>, preset: Option<String>, out: Option<PathBuf>) -> Result<bool> {
    let mut cfg = match (&config, &preset) {
        (Some(path), None) => ExperimentConfig::load(path)?,
        (None, Some(name)) => {
            presets::get(name).ok_or_else(|| anyhow!("unknown preset {name:?}"))?
        }
        _ => bail!("run needs exactly one of --config or --preset"),
    };
    if let Some(dir) = out {
        cfg.output_dir = dir.display().to_string();
    }
    let plan = cfg.resolve()?;
    let clean = runner::execute(&plan)?;
    if clean {
        println!("ok: no violations; artifacts in {}", plan.output_dir);
    } else {
        println!("VIOLATIONS found; see {}/summary.json", plan.output_dir);
    }
    Ok(clean)
}

fn cmd_bounds(
    chain: &str,
    alpha: f64,
    eta: f64,
    sobolev: f64,
    mi_ref: f64,
    steps: u64,
) -> Result<()> {
    let a_ref = SobolevConstant::new(sobolev)?;
    match chain {
        "langevin" => {
            println!("step time bound bound_sharp");
            for k in 0..=steps {
                let t = k as f64 * eta;
                let b = bounds::bound_mi_langevin(alpha, a_ref, mi_ref, t)?;
                let s = bounds::bound_mi_langevin_sharp(alpha, a_ref, mi_ref, t)?;
                println!("{k} {t} {b} {s}");
            }
        }
        "ula" => {
            println!("step bound");
            for k in 0..=steps {
                let b = bounds::bound_mi_ula(alpha, eta, a_ref, mi_ref, k)?;
                println!("{k} {b}");
            }
        }
        "proximal" => {
            println!("step bound");
            for k in 0..=steps {
                let b = bounds::bound_mi_proximal(alpha, eta, a_ref, mi_ref, k)?;
                println!("{k} {b}");
            }
        }
        _ => unreachable!("validated by clap"),
    }
    Ok(())
}

fn cmd_oracle(chain: &str, alpha: f64, k: f64, eta: f64, dim: usize) -> Result<()> {
    let mi = match chain {
        "langevin" => ou_mi_exact(alpha, k, dim)?,
        "ula" => ula_gaussian_mi_exact(alpha, eta, k.round() as u64, dim)?,
        "proximal" => proximal_gaussian_mi_exact(alpha, eta, k.round() as u64, dim)?,
        _ => unreachable!("validated by clap"),
    };
    println!("{mi}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run { config, preset, out } => match cmd_run(config, preset, out) {
            Ok(true) => return ExitCode::SUCCESS,
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
        Cmd::Bounds { chain, alpha, eta, sobolev, mi_ref, steps } => {
            cmd_bounds(&chain, alpha, eta, sobolev, mi_ref, steps)
        }
        Cmd::Oracle { chain, alpha, k, eta, dim } => cmd_oracle(&chain, alpha, k, eta, dim),
        Cmd::Presets { cmd: PresetsCmd::List } => {
            for name in presets::NAMES {
                println!("{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
