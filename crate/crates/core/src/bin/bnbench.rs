//! Command-line front end for the benchmark runner.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bnbench::runner::{
    execute, parse_config, plan, plan_summary, resolve_results_root, ExecMode, ExecOptions,
    RunContext,
};

#[derive(Parser)]
#[command(
    name = "bnbench",
    about = "Benchmark harness for graphical-model structure learning",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a benchmark configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; defaults to all available cores.
        #[arg(long)]
        cores: Option<usize>,
        /// Results root (default: $BENCHPRESS_RESULTS or ./results).
        #[arg(long)]
        results_dir: Option<PathBuf>,
    },
    /// Parse and plan a configuration without executing it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-emit evaluation CSVs and SVGs from cached results.
    Report {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        results_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, bnbench::Error> {
    match cli.command {
        Command::Validate { config } => {
            let cfg = parse_config(&config)?;
            let plan = plan(&cfg)?;
            println!("config ok: {}", plan_summary(&plan));
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            config,
            cores,
            results_dir,
        } => {
            let cfg = parse_config(&config)?;
            let the_plan = plan(&cfg)?;
            let cores = cores.unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|n| n.get())
                    .unwrap_or(1)
            });
            let ctx = RunContext {
                results_root: resolve_results_root(results_dir),
            };
            println!("plan: {}", plan_summary(&the_plan));
            let report = execute(
                &the_plan,
                &ctx,
                &ExecOptions {
                    cores,
                    mode: ExecMode::Run,
                },
            )?;
            println!("done: {}", report.summary());
            for (hash, msg) in &report.failed_jobs {
                eprintln!("failed job {hash}: {msg}");
            }
            if report.hard_failure() {
                Ok(ExitCode::FAILURE)
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Report {
            config,
            results_dir,
        } => {
            let cfg = parse_config(&config)?;
            let the_plan = plan(&cfg)?;
            let ctx = RunContext {
                results_root: resolve_results_root(results_dir),
            };
            let report = execute(
                &the_plan,
                &ctx,
                &ExecOptions {
                    cores: 1,
                    mode: ExecMode::ReportOnly,
                },
            )?;
            println!("report: {}", report.summary());
            for (hash, msg) in &report.failed_jobs {
                eprintln!("failed job {hash}: {msg}");
            }
            if report.hard_failure() {
                Ok(ExitCode::FAILURE)
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
    }
}
