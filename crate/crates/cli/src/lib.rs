//! Configuration, orchestration and reporting for the self-propelled drag
//! pipelines: meshing, corrector basis, state, derivatives, optimization,
//! the spectral oracle and the invariant suite.

pub mod checks;
pub mod commands;
pub mod config;
pub mod context;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::Parser;

pub use commands::{run, Command};
pub use config::RunConfig;
pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "selfprop", version, about = "Drag of self-propelled rigid bodies and its optimal boundary control")]
pub struct Cli {
    /// Pipeline to run.
    #[arg(value_enum)]
    pub command: Command,
    /// Run configuration (`key = value` lines).
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long, env = "SELFPROP_OUTPUT")]
    pub output: Option<PathBuf>,
    /// Worker threads (0: all cores).
    #[arg(long, env = "SELFPROP_THREADS")]
    pub threads: Option<usize>,
    /// Single-threaded, bit-reproducible run.
    #[arg(long)]
    pub deterministic: bool,
    /// Override one configuration key, e.g. `--set kappa=0.2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    pub print_config: bool,
}

/// Effective configuration: file, then environment, then flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &cli.output {
        cfg.output = o.clone();
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if cli.deterministic {
        cfg.deterministic = true;
    }
    for (i, kv) in cli.overrides.iter().enumerate() {
        let line = kv.replacen('=', " = ", 1);
        cfg.apply_text(&line, &format!("--set #{}", i + 1), None)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Sizes the global thread pool; deterministic runs use one thread so that
/// parallel reductions are order-stable.
pub fn init_threads(cfg: &RunConfig) {
    let n = if cfg.deterministic { 1 } else { cfg.threads };
    // a pool that already exists is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}
