use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use tensorcast_cli::commands;
use tensorcast_cli::config::ExperimentConfig;

#[derive(Parser)]
#[command(
    name = "tensorcast",
    version,
    about = "Embedding-training primitives, traffic and timing experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the config's `out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::resolve(self.config.as_deref(), self.seed, self.out.as_deref())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check casted gather-reduce against expand + coalesce.
    Equivalence {
        #[command(flatten)]
        common: Common,
        /// `src,dst` index to check a stored casted index against.
        #[arg(long, requires = "casted")]
        index: Option<PathBuf>,
        /// Directory holding `casted.csv` and `unique_rows.csv`.
        #[arg(long, requires = "index")]
        casted: Option<PathBuf>,
    },
    /// Schedule every design over the batch and dim sweep.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Per-primitive memory traffic.
    Traffic {
        #[command(flatten)]
        common: Common,
    },
    /// Cast a `src,dst` index file.
    Cast {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Rank-level timing of the generated workload.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Write lookup indices and coalescing-shrink statistics.
    GenWorkload {
        #[command(flatten)]
        common: Common,
    },
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v).context("serializing report")?);
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Equivalence { common, index, casted } => {
            let cfg = common.resolve()?;
            let report = match (index, casted) {
                (Some(i), Some(c)) => commands::cmd_equivalence_files(&cfg, &i, &c)?,
                _ => commands::cmd_equivalence(&cfg)?,
            };
            for f in &report.failures {
                eprintln!("instance {} (seed {}) failed: {}", f.instance, f.seed, f.reason);
            }
            if !report.golden_pass {
                eprintln!("golden casting case failed");
            }
            println!(
                "equivalence: {} instances, max relative error {:e}, {}",
                report.instances,
                report.max_relative_error,
                if report.pass { "PASS" } else { "FAIL" }
            );
            Ok(report.pass)
        }
        Command::Run { common } => {
            let report = commands::cmd_run(&common.resolve()?)?;
            print_json(&report.rows)?;
            Ok(true)
        }
        Command::Traffic { common } => {
            let summary = commands::cmd_traffic(&common.resolve()?)?;
            for c in &summary.cells {
                println!(
                    "batch {} dim {}: expand+coalesce / gather-reduce = {:.3}, casted / expand+coalesce = {:.3}",
                    c.batch, c.dim, c.expand_coalesce_over_gather_reduce, c.casted_over_expand_coalesce
                );
            }
            Ok(true)
        }
        Command::Cast { input, out } => {
            print_json(&commands::cmd_cast(&input, &out)?)?;
            Ok(true)
        }
        Command::Simulate { common } => {
            let report = commands::cmd_simulate(&common.resolve()?)?;
            for c in &report.cells {
                println!(
                    "batch {} dim {} {}: {:.3e} s, {:.1} GB/s, bottleneck rank {}",
                    c.batch,
                    c.dim,
                    c.op,
                    c.result.elapsed,
                    c.result.effective_bw / 1e9,
                    c.result.bottleneck_rank
                );
            }
            Ok(true)
        }
        Command::GenWorkload { common } => {
            let report = commands::cmd_gen_workload(&common.resolve()?)?;
            print_json(&report.shrink)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
