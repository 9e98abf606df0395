use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use colsync_cli::{execute, parse_config, Mode, RunOptions};

#[derive(Parser)]
#[command(name = "colsync", version, about = "Synchronization and coherence of atoms in a common bath")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one model and classify every atom pair.
    Simulate(Common),
    /// Final Pearson coefficient over a parameter grid.
    Sweep(Common),
    /// Ensemble-averaged residual coherence over a parameter grid.
    CoherenceMap(Common),
    /// Three-atom scenario with the pairwise consistency check.
    ThreeAtom(Common),
    /// Evaluate the collectivity and exchange coefficients.
    Coefficients(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for grid evaluation.
    #[arg(long)]
    workers: Option<usize>,
    /// Ensemble seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Only print errors.
    #[arg(long)]
    quiet: bool,
}

fn run(cli: Cli) -> Result<()> {
    let (mode, args) = match cli.command {
        Command::Simulate(a) => (Mode::Simulate, a),
        Command::Sweep(a) => (Mode::Sweep, a),
        Command::CoherenceMap(a) => (Mode::CoherenceMap, a),
        Command::ThreeAtom(a) => (Mode::ThreeAtom, a),
        Command::Coefficients(a) => (Mode::Coefficients, a),
    };
    if let Some(n) = args.workers {
        if n == 0 {
            bail!("--workers must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker pool")?;
    }
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let cfg = parse_config(&text).with_context(|| format!("in {}", args.config.display()))?;
    if cfg.mode != mode {
        bail!(
            "config declares mode `{}` but the `{mode}` subcommand was used",
            cfg.mode
        );
    }
    let report = execute(
        &cfg,
        &RunOptions {
            out: args.out,
            seed: args.seed,
        },
    )?;
    if !args.quiet || mode == Mode::Coefficients {
        print!("{}", report.summary);
    }
    if !args.quiet {
        if let Some(dir) = &report.out_dir {
            println!("wrote {} files to {}", report.files.len(), dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
