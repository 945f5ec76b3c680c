//! `idereg`: solvability analysis and control regularization from the
//! command line.
//!
//! Exit codes: 0 ok, 2 invalid input, 3 unsolvable, 4 not regularizable,
//! 5 solver and oracle disagree. `IDEREG_LOG` (off|info|debug) sets the log
//! level on stderr.

mod commands;
mod document;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Flags;

pub const EXIT_INVALID_INPUT: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(EXIT_INVALID_INPUT, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Parser)]
#[command(name = "idereg", version, about = "Solvability and control regularization of impulsive integro-differential BVPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ranks, solvability residuals and, with a control kernel, regularizability
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Sample one member of the solution family
    Solve {
        file: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Pick a control that makes the problem solvable
    Regularize {
        file: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Cross-check the verdict against a discretization oracle
    Verify {
        file: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("IDEREG_LOG", "off")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID_INPUT as u8 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Analyze { file, flags } => commands::analyze(file, flags),
        Command::Solve { file, flags } => commands::solve(file, flags),
        Command::Regularize { file, flags } => commands::regularize(file, flags),
        Command::Verify { file, flags } => commands::verify(file, flags),
    };
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            if let Some(note) = out.note {
                eprintln!("idereg: {note}");
            }
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("idereg: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
