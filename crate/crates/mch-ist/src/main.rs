//! Command-line front end: `mch-ist --config run.json [--out DIR]`.
//!
//! Exit status: 0 on full success, 1 when a gated check fails (or, with
//! `--strict`, a warning is raised), 2 on configuration or pipeline errors.

use clap::Parser;
use mch_ist::config::RunConfig;
use mch_ist::run::{run, RunOptions};
use mch_ist::time_flow::TimeConvention;
use mch_ist::Exec;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(version, about = "Inverse scattering transform pipeline for the modified Camassa-Holm equation")]
struct Cli {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long)]
    threads: Option<usize>,
    /// Treat warnings as failures.
    #[arg(long)]
    strict: bool,
    /// Negate the time term of the phase (mutation test: validation must fail).
    #[arg(long)]
    mutate_time_sign: bool,
    /// Dump the Riemann-Hilbert density and residuals at every N-th y node.
    #[arg(long, value_name = "N")]
    dump_mu: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match RunConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    let exec = match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        Some(1) => Exec::Sequential,
        Some(n) => {
            configure_pool(n);
            Exec::Parallel
        }
        None => Exec::Parallel,
    };
    let opts = RunOptions {
        exec,
        convention: if cli.mutate_time_sign { TimeConvention::Reversed } else { TimeConvention::Standard },
        strict: cli.strict,
        dump_mu_stride: cli.dump_mu,
    };
    match run(&cfg, &opts) {
        Ok(outcome) => {
            for c in &outcome.checks {
                println!("{}", c.summary());
            }
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "wrote {} files to {} (config {})",
                outcome.artifacts.len(),
                cfg.output_dir.display(),
                outcome.config_hash
            );
            if outcome.success() {
                ExitCode::SUCCESS
            } else {
                eprintln!(
                    "run failed: {} failing checks, {} warnings",
                    outcome.checks.iter().filter(|c| !c.pass).count(),
                    outcome.warnings.len()
                );
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(feature = "parallel")]
fn configure_pool(n: usize) {
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
        eprintln!("warning: could not size the thread pool: {e}");
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_pool(_: usize) {
    eprintln!("warning: built without the `parallel` feature; running sequentially");
}
