//! `pachner`: verification commands, lens-space tables and triangulation
//! checks.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or an input
//! file is invalid, 2 on malformed arguments.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use crate::commands::UsageError;

#[derive(Parser, Debug)]
#[command(name = "pachner", version, about = "Exact checks of Grassmann-algebra Pachner move relations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MoveKind {
    #[value(name = "2-3")]
    TwoThree,
    #[value(name = "1-4")]
    OneFour,
    #[value(name = "2-3-deg4")]
    TwoThreeDeg4,
    #[value(name = "3-3")]
    ThreeThree,
    #[value(name = "2-4")]
    TwoFour,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a move relation at one or many zeta assignments.
    #[command(group(ArgGroup::new("alpha_source").args(["alpha", "alpha_random"])))]
    Verify {
        #[arg(long = "move", value_enum)]
        kind: MoveKind,
        /// Comma-separated rationals for vertices 1, 2, ...
        #[arg(long, conflicts_with = "random")]
        zeta: Option<String>,
        /// Number of random zeta assignments.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Deformation parameters such as `1234=3,1235=-1/2`; cells not
        /// listed are solved for when only left-hand cells are given,
        /// zero otherwise.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        /// Draw a random consistent system per zeta assignment.
        #[arg(long)]
        alpha_random: bool,
    },
    /// Absolute value of the invariant of a lens space minus a chain.
    Lens {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "1,2,3,4")]
        zeta: String,
        /// Print a JSON report instead of the bare value.
        #[arg(long)]
        json: bool,
    },
    /// Recompute all published lens-space values as CSV.
    Tables,
    /// Validate a triangulation file and check that its chain maps compose to zero.
    CheckComplex {
        #[arg(long)]
        input: PathBuf,
        /// Defaults to random values drawn from `--seed`.
        #[arg(long)]
        zeta: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a sample triangulation as JSON.
    Export {
        /// One of tetrahedron, glued-pair, three-around-edge, cone,
        /// double-cone, strip-N, lens-P-Q, lens-P-Q-minus-N, 3-3-left,
        /// 3-3-right, 2-4-left, 2-4-right.
        #[arg(long)]
        sample: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Verify { kind, zeta, random, seed, alpha, alpha_random } => {
            commands::verify(kind, zeta.as_deref(), random, seed, alpha.as_deref(), alpha_random)
        }
        Command::Lens { p, q, n, zeta, json } => commands::lens(p, q, n, &zeta, json),
        Command::Tables => commands::tables(),
        Command::CheckComplex { input, zeta, seed } => commands::check_complex(&input, zeta.as_deref(), seed),
        Command::Export { sample, output } => commands::export(&sample, output.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
