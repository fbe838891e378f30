//! `equitel`: reproducible experiments over equivariant error bases and
//! frame-independent teleportation.
//!
//! Exit codes: 0 success, 2 verification failure, 3 schema or input
//! error, 4 refusal (no solution exists).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

use output::{CliError, Report};

#[derive(Debug, Parser)]
#[command(
    name = "equitel",
    version,
    about = "Equivariant unitary error bases and reference-frame-independent teleportation"
)]
struct Cli {
    /// Seed for every random choice; echoed into the output.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    /// Pass/fail tolerance for fidelities and residuals.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Write the report to this file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    emit: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Md,
    Csv,
}

/// Where a protocol comes from: a JSON file or a built-in fixture.
#[derive(Debug, Clone, Args)]
pub struct SpecSource {
    /// Protocol file (`rho`, `elements`, optional `alice_half`, `bob_half`, `twist`).
    #[arg(long, value_name = "FILE", conflicts_with = "fixture")]
    spec: Option<PathBuf>,

    /// Built-in protocol: `z3`, `a4`, `binary-tetrahedral`,
    /// `catalog:<tag>:<index>` or `hadamard:<group>`.
    #[arg(long, default_value = "z3")]
    fixture: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rebuild the qubit classification table.
    Table1 {
        /// Samples per continuous family.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Random candidates backing each refusal.
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// List the isolated equivariant orthogonal error bases of a rotation group.
    Catalog {
        /// `D2`, `D3`, `D4`, `tetrahedral`, `octahedral` (others are refused or are families).
        #[arg(long)]
        group: String,
        /// Also write ball coordinates of every entry as CSV.
        #[arg(long, value_name = "PATH")]
        emit_ball_csv: Option<PathBuf>,
    },
    /// Check a unitary error basis, and its equivariance under a representation.
    Verify {
        #[arg(long, value_name = "FILE")]
        ueb: PathBuf,
        #[arg(long, value_name = "FILE")]
        rep: Option<PathBuf>,
    },
    /// Lift a catalog entry to a qubit basis over the binary cover.
    Lift {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Build the Hadamard basis for a permutation group acting on `C^n`.
    Hadamard {
        #[arg(long)]
        n: usize,
        /// Permutation group preset of degree `n`; defaults to `S<n>`.
        #[arg(long)]
        group: Option<String>,
    },
    /// Send messages through a protocol's channel and print transcripts.
    Channel {
        #[command(flatten)]
        source: SpecSource,
        /// Only this message.
        #[arg(long)]
        message: Option<usize>,
        /// Only this misalignment (group element label).
        #[arg(long)]
        g: Option<String>,
    },
    /// Run the protocol once (with `--g`) or sweep every misalignment and outcome.
    Teleport {
        #[command(flatten)]
        source: SpecSource,
        #[arg(long)]
        g: Option<String>,
        /// `random`, `basis:<k>` or a JSON file of `[re, im]` pairs.
        #[arg(long, default_value = "random")]
        psi: String,
        /// Force Alice's outcome instead of sampling it.
        #[arg(long)]
        outcome: Option<usize>,
        /// Random input states per sweep.
        #[arg(long, default_value_t = 100)]
        states: usize,
    },
    /// Change Bob's frame between sending and receipt, over all pairs.
    DrTest {
        #[command(flatten)]
        source: SpecSource,
        #[arg(long, default_value_t = 10)]
        states: usize,
    },
    /// Compare wire statistics across misalignments.
    Leakage {
        #[command(flatten)]
        source: SpecSource,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Negative control: always send this outcome.
        #[arg(long)]
        forced: Option<usize>,
        /// Largest acceptable pairwise total-variation distance.
        #[arg(long, default_value_t = 0.02)]
        max_tv: f64,
    },
    /// Decide whether `ρ ⊗ ρ*` can be monomial.
    MonomialCheck {
        #[arg(long)]
        group: String,
        /// `3d-irrep`, `3d-irrep-conj` (A5), `natural`, `standard`, `trivial` or a representation file.
        #[arg(long)]
        rep: String,
    },
}

pub struct Context {
    pub seed: u64,
    pub tol: f64,
}

fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    let ctx = Context { seed: cli.seed, tol: cli.tol };
    match &cli.command {
        Command::Table1 { samples, trials } => commands::table1(&ctx, *samples, *trials),
        Command::Catalog { group, emit_ball_csv } => commands::catalog(&ctx, group, emit_ball_csv.as_deref()),
        Command::Verify { ueb, rep } => commands::verify(&ctx, ueb, rep.as_deref()),
        Command::Lift { group, index } => commands::lift(&ctx, group, *index),
        Command::Hadamard { n, group } => commands::hadamard(&ctx, *n, group.as_deref()),
        Command::Channel { source, message, g } => commands::channel(&ctx, source, *message, g.as_deref()),
        Command::Teleport { source, g, psi, outcome, states } => {
            commands::teleport(&ctx, source, g.as_deref(), psi, *outcome, *states)
        }
        Command::DrTest { source, states } => commands::dr_test(&ctx, source, *states),
        Command::Leakage { source, samples, forced, max_tv } => {
            commands::leakage(&ctx, source, *samples, *forced, *max_tv)
        }
        Command::MonomialCheck { group, rep } => commands::monomial(&ctx, group, rep),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = dispatch(&cli).and_then(|report| {
        let text = report.render(cli.format)?;
        output::write(cli.emit.as_deref(), &text)?;
        Ok(report.exit)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
