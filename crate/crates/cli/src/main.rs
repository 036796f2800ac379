//! `selinf` command-line tool.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure (including an
//! exceeded failure budget), 4 empty lasso model, 1 anything else.

mod args;
mod error;
mod infer;
mod manifest;
mod output;
mod simulate;
mod table;
mod tnci;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::CliError;
use crate::manifest::Manifest;

/// What a successful command reports back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Artifacts were written but some numbers could not be computed.
    Numerical,
    NullModel,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Numerical => 3,
            Status::NullModel => 4,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("SELINF_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("SELINF_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure {threads} threads: {e}")))
}

fn run(cli: Cli) -> Result<Status, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Infer(a) => infer::run(&a.to_manifest()?, &a.out_dir),
        Command::Simulate(a) => simulate::run(&a.to_manifest()?, &a.out_dir),
        Command::Tnci(a) => tnci::run(&a),
        Command::Rerun(a) => match Manifest::load(&a.manifest)? {
            Manifest::Infer(m) => infer::run(&m, &a.out_dir),
            Manifest::Simulate(m) => simulate::run(&m, &a.out_dir),
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
