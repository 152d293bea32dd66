//! `aggfield`: reproducible experiments on aggregated isotropic
//! autoregressive random fields.
//!
//! Exit codes: 0 success, 1 verification/analysis failure, 2 usage or
//! validation error.

// negated float comparisons are deliberate: `!(x > 0.0)` rejects NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use commands::CmdError;
use config::{ExperimentConfig, SimulateMode};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "aggfield",
    about = "Aggregated isotropic lattice AR fields: spectra, synthesis, memory estimation",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration (TOML, or a sidecar JSON from a previous run)
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate the aggregated spectral density on a grid or along a line
    Spectral {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Synthesize field realizations (single coefficient, aggregate, or limit)
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Override simulate.mode: single | aggregate | limit
        #[arg(long)]
        mode: Option<String>,
    },
    /// Periodogram, radial spectrum and memory report from field files
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        /// Input field files (.f64 with sidecars); overrides analyze.inputs
        inputs: Vec<PathBuf>,
    },
    /// Run the built-in verification battery
    Verify {
        /// Optional config for quadrature settings and the alpha list
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn init_workers(workers: Option<usize>) {
    if let Some(n) = workers {
        // ignore failure: the global pool may already exist in tests
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

/// Load, apply overrides, then validate the fully resolved configuration.
fn load_config(
    path: &Path,
    seed: Option<u64>,
    mode: Option<&str>,
) -> Result<ExperimentConfig, CmdError> {
    let mut cfg =
        ExperimentConfig::load(path).map_err(|e| CmdError::Validation(e.to_string()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(m) = mode {
        cfg.simulate.mode = match m {
            "single" => SimulateMode::Single,
            "aggregate" => SimulateMode::Aggregate,
            "limit" => SimulateMode::Limit,
            other => {
                return Err(CmdError::Validation(format!(
                    "unknown --mode {other:?}: expected single, aggregate or limit"
                )))
            }
        };
    }
    cfg.validate()
        .map_err(|e| CmdError::Validation(e.to_string()))?;
    Ok(cfg)
}

fn run() -> Result<(), CmdError> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Spectral { common } => {
            init_workers(common.workers);
            let cfg = load_config(&common.config, common.seed, None)?;
            let files = commands::cmd_spectral(&cfg, &common.out)?;
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Cmd::Simulate { common, mode } => {
            init_workers(common.workers);
            let cfg = load_config(&common.config, common.seed, mode.as_deref())?;
            let files = commands::cmd_simulate(&cfg, &common.out)?;
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Cmd::Analyze { common, inputs } => {
            init_workers(common.workers);
            let cfg = load_config(&common.config, common.seed, None)?;
            let files = commands::cmd_analyze(&cfg, &inputs, &common.out)?;
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Cmd::Verify {
            config,
            seed,
            workers,
        } => {
            init_workers(workers);
            let cfg = match config {
                Some(path) => load_config(&path, None, None)?,
                None => default_verify_config(),
            };
            commands::cmd_verify(&cfg, seed.unwrap_or(42))
        }
    }
}

/// Verify without a config file: defaults everywhere.
fn default_verify_config() -> ExperimentConfig {
    ExperimentConfig {
        law: config::LawConfig {
            alpha: 0.5,
            phi: aggfield::theta::PhiSpec::Constant,
            support: aggfield::theta::SupportSign::Positive,
        },
        sigma2_eps: 1.0,
        lattice: config::LatticeConfig { n1: 64, n2: 64 },
        seed: 42,
        workers: None,
        quadrature: Default::default(),
        spectral: Default::default(),
        simulate: Default::default(),
        analyze: Default::default(),
        verify: Default::default(),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
