//! Batch experiment runner CLI.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical-contract violation,
//! 1 anything else.

use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use darksim::config::Config;
use darksim::error::Error;
use darksim::scenario::{run_scenario, write_outputs, SCENARIOS};

#[derive(Parser, Debug)]
#[command(
    name = "darksim",
    version,
    about = "Protected-subspace simulator for continuously decoupled trapped-ion qubits"
)]
struct Cli {
    /// Scenario to run.
    #[arg(long, value_parser = SCENARIOS)]
    scenario: String,

    /// Config file (INI-style key = value with [sections]).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Repeatable key=value override, e.g. --set drive.omega1=42khz.
    #[arg(long = "set")]
    set: Vec<String>,

    /// Output directory for summary.txt, CSVs and manifest.txt.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Master seed for stochastic scenarios.
    #[arg(long)]
    seed: Option<u64>,

    /// Gate kind shortcut for --scenario gate (y, x or z).
    #[arg(long)]
    kind: Option<String>,
}

fn run(cli: &Cli) -> Result<(), Error> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for assignment in &cli.set {
        cfg.set_override(assignment)?;
    }
    if let Some(kind) = &cli.kind {
        cfg.set_override(&format!("gate.kind={kind}"))?;
    }
    let output = run_scenario(&cli.scenario, &cfg, cli.seed)?;
    write_outputs(&cli.out, &cli.scenario, &cfg, &output, cli.seed)?;
    for (k, v) in &output.summary {
        println!("{k} = {v}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                Error::StepSize { .. } | Error::NumericalContract(_) => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
