//! `qheat`: run heat-valve experiments and evaluate the analytic predictions.
//!
//! Exit status: 0 on success, 2 for usage or configuration errors, 3 when
//! the numerics fail.

mod commands;
mod config;
mod manifest;
mod oracle;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "qheat", version, about = "Exact heat transport through a single-level fermionic valve")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Steady-state current versus coupling strength; writes sweep.csv.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// One sweep per coupling distribution (sweep_<distribution>.csv).
        #[arg(long)]
        compare_distributions: bool,
    },
    /// Time-resolved current with its normal/anomalous split; writes trace.csv.
    Trace {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Evaluate closed-form predictions.
    Oracle {
        #[command(subcommand)]
        which: oracle::OracleCommand,
    },
    /// Compare against brute-force many-body evolution on a small valve.
    #[command(hide = true)]
    FockCheck {
        #[arg(long, default_value_t = 2)]
        bath_size: usize,
        #[arg(long, default_value_t = 0.3)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        t1: f64,
        #[arg(long, default_value_t = 0.0)]
        t2: f64,
        #[arg(long)]
        rwa: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Master seed; overrides `valve.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Figure-scale bath sizes and realization counts.
    #[arg(long)]
    pub full: bool,
    /// Maximum worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_enum, default_value_t = KindArg::Both)]
    pub kind: KindArg,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum KindArg {
    Exact,
    Rwa,
    Both,
}

impl KindArg {
    pub fn kinds(self) -> Vec<qheat_core::harness::Kind> {
        use qheat_core::harness::Kind;
        match self {
            KindArg::Exact => vec![Kind::Exact],
            KindArg::Rwa => vec![Kind::Rwa],
            KindArg::Both => Kind::BOTH.to_vec(),
        }
    }
}

/// Command failure, mapped onto the exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "error: {msg}"),
            Failure::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl From<qheat_core::Error> for Failure {
    fn from(e: qheat_core::Error) -> Self {
        if e.is_config() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Sweep {
            run,
            compare_distributions,
        } => commands::sweep(&run, compare_distributions),
        Command::Trace { run } => commands::trace(&run),
        Command::Oracle { which } => oracle::run(which),
        Command::FockCheck {
            bath_size,
            gamma,
            t1,
            t2,
            rwa,
            seed,
        } => commands::fock_check(bath_size, gamma, t1, t2, rwa, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}
