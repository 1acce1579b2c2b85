use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use livsic::error::Result;
use livsic::experiment::{self, ExperimentConfig, Outcome, Overrides, CONFIG_HELP};

#[derive(Parser)]
#[command(name = "livsic", version, about = "Seeded Livsic experiments for germ cocycles", after_help = CONFIG_HELP)]
struct Cli {
    /// Flat TOML experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Generator seed, overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Sets both poo_tol and solve_tol.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    orbit_length: Option<usize>,
    #[arg(long, global = true)]
    kmax: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded H_true and its coboundary cocycle.
    Generate,
    /// Periodic orbit check; writes poo.jsonl.
    Poo {
        /// Cocycle file from `generate`; generated in memory when absent.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Solve on a dense orbit of the full shift.
    Solve {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Re-check a stored solution.
    Verify {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Tabulate the majorant series G_S.
    Majorant {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Summarize solve reports into report.csv and summary.txt.
    Report { reports: Vec<PathBuf> },
}

fn run(cli: &Cli) -> Result<Outcome> {
    let overrides = Overrides {
        seed: cli.seed,
        tol: cli.tol,
        orbit_length: cli.orbit_length,
        kmax: cli.kmax,
    };
    let load = || ExperimentConfig::load(cli.config.as_deref(), &overrides);
    match &cli.command {
        Command::Generate => experiment::run_generate(&load()?, &cli.out),
        Command::Poo { input } => experiment::run_poo(&load()?, input.as_deref(), &cli.out),
        Command::Solve { input } => experiment::run_solve(&load()?, input.as_deref(), &cli.out),
        Command::Verify { input, solution } => experiment::run_verify(&load()?, input.as_deref(), solution, &cli.out),
        Command::Majorant { input } => experiment::run_majorant(&load()?, input.as_deref(), &cli.out),
        Command::Report { reports } => experiment::run_report(reports, &cli.out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary.trim_end());
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(if outcome.pass { 0 } else { 2 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(experiment::exit_code(&e) as u8)
        }
    }
}
