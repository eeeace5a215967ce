//! `workfluct`: work distributions, fluctuation-theorem batches and
//! contextuality witnesses for driven finite-dimensional quantum systems.
//!
//! Exit codes: 0 success, 2 configuration/validation error, 3 numerical
//! failure. Set `WORKFLUCT_STRICT=1` to halve every validation tolerance.

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::CommonFlags;
use workfluct_core::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    /// Bad config, bad input shape, I/O trouble: exit 2.
    Config(String),
    /// A numerical routine failed or a verification did not pass: exit 3.
    Numeric(String),
}

impl CliError {
    pub fn config(msg: String) -> Self {
        CliError::Config(msg)
    }

    pub fn numeric(msg: String) -> Self {
        CliError::Numeric(msg)
    }

    pub fn from_core(e: CoreError) -> Self {
        match e {
            CoreError::ConvergenceFailure { .. }
            | CoreError::PostselectionImpossible { .. }
            | CoreError::SingularGibbsState { .. }
            | CoreError::BracketFailure { .. }
            | CoreError::NotAProbability { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numeric(_) => "numeric",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numeric(m) => m,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "workfluct",
    about = "Work distributions, fluctuation-theorem checks and contextuality witnesses",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a protocol: emit the requested work distributions and FT reports.
    Run(CommonFlags),
    /// Scan the witness conditions over a grid of pointer spreads.
    ScanS(CommonFlags),
    /// Run the seeded random-instance verification batches.
    Verify(CommonFlags),
    /// Find the witness-minimizing state and its spread threshold.
    Witness(CommonFlags),
}

type CommandFn = fn(&config::Resolved) -> Result<(), CliError>;

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let (flags, run): (&CommonFlags, CommandFn) = match &cli.command {
        Command::Run(f) => (f, commands::cmd_run),
        Command::ScanS(f) => (f, commands::cmd_scan_s),
        Command::Verify(f) => (f, commands::cmd_verify),
        Command::Witness(f) => (f, commands::cmd_witness),
    };

    let result = config::resolve(flags).and_then(|cfg| run(&cfg));
    match result {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("workfluct: error kind={} msg={:?}", e.kind(), e.message());
            std::process::ExitCode::from(e.exit_code())
        }
    }
}
