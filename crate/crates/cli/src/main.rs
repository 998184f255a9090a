//! `srlknn`: build fingerprint databases, locate scans, replay trajectories
//! and run the perturbation and ambiguity studies.
//!
//! Exit status: 0 on success, 2 for usage, configuration and input-file
//! errors, 3 when the inputs parse but cannot support the run.

mod ambiguity;
mod args;
mod build;
mod error;
mod evaluate;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult};

fn run(cli: &Cli, command: Vec<String>) -> CliResult<()> {
    match &cli.command {
        Command::Build(a) => build::run(&a.source, command),
        Command::Locate(a) => evaluate::locate_once(a),
        Command::Evaluate(a) => evaluate::evaluate(a, command),
        Command::Perturb(a) => evaluate::perturb(a, command),
        Command::Ambiguity(a) => ambiguity::run(a, command),
        Command::Rerun(a) => rerun(a),
    }
}

/// Runs a recorded command again, writing into a new directory.
fn rerun(a: &args::RerunArgs) -> CliResult<()> {
    let recorded = manifest::load_manifest(&a.manifest)?;
    manifest::verify_inputs(&recorded)?;
    let mut argv = vec![env!("CARGO_BIN_NAME").to_string()];
    argv.extend(recorded.command.iter().cloned());
    argv.push("--out-dir".into());
    argv.push(a.out_dir.display().to_string());
    let cli = Cli::try_parse_from(&argv).map_err(|e| {
        CliError::Usage(format!(
            "{}: recorded command is invalid: {e}",
            a.manifest.display()
        ))
    })?;
    if matches!(cli.command, Command::Rerun(_)) {
        return Err(CliError::Usage("a manifest cannot record a rerun".into()));
    }
    run(&cli, recorded.command)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SRL_LOG")).init();
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match run(&cli, manifest::strip_out_dir(&argv)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
