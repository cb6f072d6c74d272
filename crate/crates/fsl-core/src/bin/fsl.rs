//! Command-line front end: run experiments from config files, browse the
//! experiment registry, and inspect FSL1 snapshots.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fsl_core::config::load_config;
use fsl_core::experiments::{find, Verdict, REGISTRY};
use fsl_core::snapshot::snapshot_info;
use fsl_core::{runner, Error};

#[derive(Parser)]
#[command(
    name = "fsl",
    version,
    about = "Numerical laboratory for conservation laws with critical fractional dissipation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the experiment named by a config file
    Run {
        /// key = value config file (TOML)
        config: PathBuf,
    },
    /// List the available experiments
    List,
    /// Show what an experiment measures and how to feed it
    Describe {
        /// Experiment id or alias, as shown by `fsl list`
        id: String,
    },
    /// Print the header and summary statistics of an FSL1 snapshot
    SnapshotInfo {
        /// Path to a .fsl1 file
        file: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("fsl: {err}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> fsl_core::Result<ExitCode> {
    match cli.command {
        Command::Run { config } => {
            if let Some(threads) = runner::apply_thread_cap() {
                eprintln!("fsl: worker pool capped at {threads} threads (FSL_THREADS)");
            }
            let cfg = load_config(&config)?;
            let outcome = runner::execute(&cfg)?;
            print_outcome(&outcome);
            Ok(ExitCode::from(outcome.report.verdict.exit_code() as u8))
        }
        Command::List => {
            for meta in REGISTRY {
                println!("{:<24} {}", meta.id, meta.summary);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Describe { id } => {
            let meta = find(&id).ok_or_else(|| Error::UnknownExperiment(id.clone()))?;
            println!("{}", meta.id);
            if !meta.aliases.is_empty() {
                println!("  aliases:   {}", meta.aliases.join(", "));
            }
            println!("  summary:   {}", meta.summary);
            println!("  reference: {}", meta.reference);
            println!("  inputs:    {}", meta.inputs);
            println!("  outputs:   {}", meta.outputs);
            println!("  estimate:  {}", meta.estimate);
            Ok(ExitCode::SUCCESS)
        }
        Command::SnapshotInfo { file } => {
            let info = snapshot_info(&file)?;
            println!("dim:            {}", info.dim);
            println!("points:         {} per axis", info.points);
            println!("half width:     {}", info.half_width);
            println!("time:           {}", info.time);
            println!(
                "background:     {}",
                info.background.as_deref().unwrap_or("none (pure deviation)")
            );
            println!("value range:    [{:.6e}, {:.6e}]", info.min, info.max);
            println!("deviation mass: {:.6e}", info.deviation_mass);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_outcome(outcome: &runner::RunOutcome) {
    let report = &outcome.report;
    let tag = if outcome.cached { " (cached)" } else { "" };
    println!("experiment: {}{tag}", report.experiment);
    println!("run dir:    {}", outcome.dir.display());
    for reason in &report.inconclusive {
        println!("inconclusive: {reason}");
    }
    for check in report.checks.iter().filter(|c| !c.pass) {
        println!("failed check: {} ({})", check.name, check.detail);
    }
    for exp in report.exponents.iter().filter(|e| !e.pass) {
        println!(
            "failed exponent: {} fitted {:.4} vs {:.4} +/- {:.4}",
            exp.name, exp.fitted, exp.expected, exp.tolerance
        );
    }
    let failed_bounds = report.bounds.iter().filter(|b| !b.pass).count();
    if failed_bounds > 0 {
        println!("failed bounds: {failed_bounds} of {}", report.bounds.len());
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    let verdict = match report.verdict {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Inconclusive => "INCONCLUSIVE",
    };
    println!("verdict:    {verdict} ({:.1}s)", report.runtime_seconds);
}
