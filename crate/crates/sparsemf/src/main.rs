use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sparsemf::config::{ConfigError, ExperimentConfig};
use sparsemf::experiments::{self, CliError, Context};

#[derive(Parser)]
#[command(name = "sparsemf", version, about = "Sparse-graph mean-field experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; output does not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write gnuplot two-column files under `plot/`.
    #[arg(long, global = true)]
    emit_plot_data: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Coupled sparse and dense runs over the sweep.
    Simulate,
    /// Runs plus medians per sweep point.
    SweepScaling,
    /// Degree, row-sum and norm statistics of sampled graphs.
    GraphStats,
    /// Limit-equation densities compared with a dense run.
    Mckv,
    /// The approximation ladder and mollifier checks.
    Approx,
    /// Mollifier grid assertions only.
    MollifyCheck,
    /// Lower, exact and upper norm certificates side by side.
    NormBench,
}

fn context(cli: &Cli) -> Result<Context, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| ConfigError::new("`--config` is required"))?;
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let mut ctx = Context::new(config, path.parent())?
        .workers(workers)
        .emit_plot_data(cli.emit_plot_data);
    if let Some(out) = &cli.out {
        ctx = ctx.out(out);
    }
    Ok(ctx)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let ctx = context(cli)?;
    std::fs::create_dir_all(&ctx.out)?;
    match cli.command {
        Command::Simulate => {
            let rows = experiments::simulate(&ctx)?;
            eprintln!("simulate: {} runs", rows.len());
        }
        Command::SweepScaling => {
            let rows = experiments::sweep_scaling(&ctx)?;
            eprintln!("sweep-scaling: {} sweep points", rows.len());
        }
        Command::GraphStats => {
            let rows = experiments::graph_stats(&ctx)?;
            eprintln!("graph-stats: {} samples", rows.len());
        }
        Command::Mckv => {
            let report = experiments::mckv(&ctx)?;
            eprintln!("mckv: {} checkpoints", report.rows.len());
        }
        Command::Approx => {
            let rows = experiments::approx(&ctx)?;
            let failed = rows.iter().filter(|r| r.pass == Some(false)).count();
            eprintln!("approx: {} cells, {failed} failed", rows.len());
        }
        Command::MollifyCheck => {
            let checks = experiments::mollify_check(&ctx)?;
            let failed = checks.iter().filter(|c| !c.pass).count();
            eprintln!("mollify-check: {} checks, {failed} failed", checks.len());
        }
        Command::NormBench => {
            let rows = experiments::norm_bench(&ctx)?;
            eprintln!("norm-bench: {} samples", rows.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sparsemf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
