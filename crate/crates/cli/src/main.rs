//! `mrk`: numerical ranges, numerical radii and matricial ranges from the
//! command line.

mod commands;
mod plot;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mrk_core::matrange::{DEFAULT_RESTARTS, ORACLE_SEED, SDP_TOL};

use crate::report::{CliError, Outcome};

#[derive(Debug, Parser)]
#[command(name = "mrk", version, about = "Numerical and matricial range computations")]
struct Cli {
    /// Emit the JSON run report on stdout instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Seed for every randomized step.
    #[arg(long, global = true, env = "MRK_SEED", default_value_t = ORACLE_SEED)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Numerical radius ω(T) with the maximizing angle and unit vector.
    Radius {
        matrix: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Boundary of W(T), as CSV and/or an SVG figure.
    Range {
        matrix: PathBuf,
        #[arg(long, default_value_t = 360)]
        points: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// ν^n(T) = sup |Tr X| over W^n(T).
    Nu {
        matrix: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = SDP_TOL)]
        tol: f64,
    },
    /// ω^n(T) = sup ‖X‖₁ over W^n(T).
    Omega {
        matrix: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = SDP_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
    },
    /// Decide whether X ∈ W^n(T).
    Member {
        t: PathBuf,
        x: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Run property batteries on seeded random instances.
    Verify {
        #[arg(long, value_enum, default_value_t = verify::Suite::All)]
        suite: verify::Suite,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Size of T; drawn from 2..=4 per trial when omitted.
        #[arg(long)]
        k: Option<usize>,
        /// Output dimension; drawn from 1..=3 per trial when omitted.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Write a seeded random matrix file.
    Random {
        #[arg(long)]
        size: usize,
        #[arg(long, value_enum, default_value_t = RandomKind::Ginibre)]
        kind: RandomKind,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomKind {
    Ginibre,
    Hermitian,
    Unitary,
    Normal,
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let seed = cli.seed;
    match &cli.command {
        Command::Radius { matrix, tol } => commands::radius(matrix, *tol),
        Command::Range {
            matrix,
            points,
            svg,
            csv,
        } => commands::range(matrix, *points, svg.as_deref(), csv.as_deref()),
        Command::Nu { matrix, n, tol } => commands::nu(matrix, *n, *tol),
        Command::Omega {
            matrix,
            n,
            tol,
            restarts,
        } => commands::omega(matrix, *n, *tol, *restarts, seed),
        Command::Member { t, x, tol } => commands::member(t, x, *tol),
        Command::Verify { suite, trials, k, n } => verify::run(*suite, *trials, *k, *n, seed),
        Command::Random { size, kind, out } => commands::random(*size, *kind, out.as_deref(), seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = std::time::Instant::now();
    match run(&cli) {
        Ok(outcome) => {
            let code = outcome.code;
            report::emit(outcome, &cli, started.elapsed());
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("mrk: {e}");
            ExitCode::from(e.code())
        }
    }
}

impl Cli {
    fn command_name(&self) -> &'static str {
        match self.command {
            Command::Radius { .. } => "radius",
            Command::Range { .. } => "range",
            Command::Nu { .. } => "nu",
            Command::Omega { .. } => "omega",
            Command::Member { .. } => "member",
            Command::Verify { .. } => "verify",
            Command::Random { .. } => "random",
        }
    }
}
