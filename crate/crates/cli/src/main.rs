//! `lu-equiv`: batch front-end for local unitary equivalence checks.
//!
//! Exit codes: 0 consistent (or equivalent), 1 distinguished, 2 inconclusive,
//! 3 parse or usage error, 4 invariant violation, 5 dimension mismatch.

mod commands;
mod error;
mod formats;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lu_equiv_core::specht::{DEFAULT_HORIZON, DEFAULT_TOL};
use lu_equiv_core::{CheckConfig, PairMode};

use commands::{CheckOptions, Criterion};
use error::EXIT_PARSE;

#[derive(Debug, Parser)]
#[command(name = "lu-equiv", version, about = "Local unitary equivalence checks for 2- and 3-party qudit states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct EngineArgs {
    /// Longest word length compared.
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    horizon: usize,
    /// Relative tolerance for norms and traces.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Sweep every word up to the horizon instead of stopping at the first violation.
    #[arg(long)]
    exhaustive: bool,
    /// Write the report here instead of printing it.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
}

impl EngineArgs {
    fn config(&self) -> CheckConfig {
        CheckConfig { max_len: self.horizon, tol: self.tol, exhaustive: self.exhaustive }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Correlation tensors of a state file.
    Extract {
        state: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// State file from a tensor-rep file.
    Reconstruct {
        tensors: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Two-party equivalence battery.
    Check2 {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        /// Report quasi-LU only, without the qubit LU upgrade.
        #[arg(long)]
        quasi: bool,
    },
    /// Three-party equivalence battery.
    Check3 {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        /// Battery version: 1 traces out party 1, 2 traces out party 2.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        battery: u8,
        #[arg(long)]
        quasi: bool,
    },
    /// Seeded pair of states.
    GenPair {
        /// Local dimensions, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "lu", value_parser = parse_mode)]
        mode: PairMode,
        out_a: PathBuf,
        out_b: PathBuf,
    },
    /// Trace-identity criteria on raw matrix lists.
    Specht {
        matrices: PathBuf,
        #[arg(long, value_enum, default_value_t = Criterion::Specht)]
        criterion: Criterion,
        #[command(flatten)]
        engine: EngineArgs,
    },
}

fn parse_mode(s: &str) -> Result<PairMode, String> {
    s.parse().map_err(|e: lu_equiv_core::LuError| e.to_string())
}

fn run(cli: Cli) -> error::CliResult<i32> {
    match cli.command {
        Command::Extract { state, out } => commands::extract_cmd(&state, out.as_deref()),
        Command::Reconstruct { tensors, out } => commands::reconstruct_cmd(&tensors, out.as_deref()),
        Command::Check2 { a, b, engine, quasi } => {
            commands::check2_cmd(&CheckOptions { a, b, cfg: engine.config(), quasi, json: engine.json })
        }
        Command::Check3 { a, b, engine, battery, quasi } => commands::check3_cmd(
            &CheckOptions { a, b, cfg: engine.config(), quasi, json: engine.json },
            battery,
        ),
        Command::GenPair { dims, seed, mode, out_a, out_b } => {
            commands::gen_pair_cmd(&dims, seed, mode, &out_a, &out_b)
        }
        Command::Specht { matrices, criterion, engine } => {
            commands::specht_cmd(&matrices, criterion, &engine.config(), engine.json.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
