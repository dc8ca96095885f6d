//! `retrialq`: stationary analysis of the batch-arrival retrial queue.
//!
//! Subcommands wrap the exact, asymptotic, and simulation engines and write
//! deterministic CSV/JSON artifacts; `compare` additionally gates the refined
//! tail-equivalence checks for CI use.
//!
//! Exit codes: 0 success, 2 configuration error, 3 unstable model,
//! 4 numerical failure, 5 unsupported tail regime, 6 comparison check failed.

// Index loops over coupled per-level slices stay as indices.
#![allow(clippy::needless_range_loop)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use retrialq_core::Error;

#[derive(Parser)]
#[command(
    name = "retrialq",
    about = "Exact, asymptotic, and simulated stationary distributions of the M^X/G/1 retrial queue",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the exact truncated stationary distributions to CSV.
    Exact {
        /// Configuration file (flat `section.key = value` format).
        #[arg(short, long)]
        config: PathBuf,
        /// Output CSV path; a `.json` metadata sidecar is written next to it.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Evaluate the asymptotic tail curves and constants.
    Asym {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Smallest level of the evaluation grid.
        #[arg(long, default_value_t = 8)]
        j_lo: u64,
        /// Largest level of the evaluation grid.
        #[arg(long, default_value_t = 16384)]
        j_hi: u64,
        /// Number of (log-spaced) grid points.
        #[arg(long, default_value_t = 49)]
        points: usize,
    },
    /// Run the replicated discrete-event simulation.
    Sim {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Check the refined equivalence of the retrial and non-retrial tails.
    Compare {
        #[arg(short, long)]
        config: PathBuf,
        /// Output JSON report path.
        #[arg(short, long)]
        out: PathBuf,
        /// Optional log-log SVG plot of tails and asymptotes.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Optional simulation artifact (the JSON sidecar of `sim`) to
        /// difference against the exact tails.
        #[arg(long)]
        sim: Option<PathBuf>,
    },
    /// Validate the second-order convolution tail expansion numerically.
    CheckExpansion {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) => 2,
        Error::Unstable { .. } => 3,
        Error::Numerical(_) | Error::TruncationMismatch { .. } => 4,
        Error::UnsupportedRegime(_) => 5,
    }
}

fn paint(ok: bool) -> String {
    let word = if ok { "PASS" } else { "FAIL" };
    if std::env::var_os("NO_COLOR").is_some() {
        word.to_string()
    } else if ok {
        format!("\x1b[32m{word}\x1b[0m")
    } else {
        format!("\x1b[31m{word}\x1b[0m")
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Exact { config, out } => commands::cmd_exact(config, out).map(|()| true),
        Command::Asym {
            config,
            out,
            j_lo,
            j_hi,
            points,
        } => commands::cmd_asym(config, out, *j_lo, *j_hi, *points).map(|()| true),
        Command::Sim { config, out } => commands::cmd_sim(config, out).map(|()| true),
        Command::Compare {
            config,
            out,
            svg,
            sim,
        } => commands::cmd_compare(config, out, svg.as_deref(), sim.as_deref()),
        Command::CheckExpansion { config, out } => {
            commands::cmd_check_expansion(config, out).map(|()| true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("comparison: {}", paint(false));
            ExitCode::from(6)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
