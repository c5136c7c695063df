//! Command-line front end for the trinomial-algebra library.
//!
//! Subcommands map one-to-one onto the library modules: `validate` and
//! `grading` front the data model and the grading group, `derivations` and
//! `classify` the template enumeration and the existence criteria, `apply`,
//! `kernel`, and `flow` individual derivations, `search` the degree-bounded
//! brute-force oracle, and `check` randomized spot-checks of the enumerated
//! families. Input is an algebra-descriptor file; `--machine` switches
//! stdout to a JSON report carrying the same content.
//!
//! Exit codes: 0 on success, 1 when a computation fails (flow of a
//! non-nilpotent derivation, oversized search space, a failed spot-check),
//! 2 when an input does not parse or validate.

use clap::{Parser, Subcommand};
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use trinomial::kernel::KernelBounds;
use trinomial_cli::{commands, CliError};

#[derive(Parser)]
#[command(name = "trinomial", version, about = "Exact computations on trinomial algebras")]
struct Cli {
    /// Emit a JSON report on stdout instead of text.
    #[arg(long, global = true)]
    machine: bool,
    /// Override the nilpotency-iteration cap.
    #[arg(long, global = true)]
    cap: Option<u32>,
    /// Seed for randomized spot-checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a descriptor and check the algebra hypotheses.
    Validate { file: PathBuf },
    /// Report the finest grading: group shape, invariant factors, degrees.
    Grading { file: PathBuf },
    /// Enumerate the elementary derivation families.
    Derivations { file: PathBuf },
    /// Decide existence of a homogeneous LND, the boundary case, rigidity.
    Classify { file: PathBuf },
    /// Apply a derivation to a polynomial and print the image.
    Apply {
        file: PathBuf,
        /// Derivation spec: ds:p, dc:c1,..., or dcb:c0,...;b0,...
        derivation: String,
        poly: String,
    },
    /// Kernel-membership verdict, or stream generated kernel elements.
    Kernel {
        file: PathBuf,
        /// Derivation spec: ds:p, dc:c1,..., or dcb:c0,...;b0,...
        derivation: String,
        /// Homogeneous polynomial to test (omit with --generate).
        #[arg(required_unless_present = "generate", conflicts_with = "generate")]
        poly: Option<String>,
        /// Generate kernel elements within the bounds instead.
        #[arg(long)]
        generate: bool,
        /// Bound on the structural part (univariate/binomial degree).
        #[arg(long, default_value_t = 2)]
        structural: u32,
        /// Bound on the total degree of the kernel-variable monomial.
        #[arg(long, default_value_t = 4)]
        support: u32,
        /// Bound on each free-variable exponent.
        #[arg(long, default_value_t = 2)]
        free: u32,
    },
    /// Print the exponential flow exp(t*D) of a derivation.
    Flow {
        file: PathBuf,
        /// Derivation spec: ds:p, dc:c1,..., or dcb:c0,...;b0,...
        derivation: String,
    },
    /// Brute-force search for homogeneous LNDs up to a degree bound.
    Search {
        file: PathBuf,
        /// Total-degree bound on image monomials.
        #[arg(long, default_value_t = 3)]
        max_degree: u32,
    },
    /// Randomized spot-checks (Leibniz, degrees, nilpotency) per family.
    Check {
        file: PathBuf,
        /// Random polynomial pairs tested per family.
        #[arg(long, default_value_t = 20)]
        pairs: u32,
    },
}

fn run(cli: &Cli) -> Result<commands::CmdOutput, CliError> {
    match &cli.command {
        Command::Validate { file } => commands::validate(file),
        Command::Grading { file } => commands::grading(file),
        Command::Derivations { file } => commands::derivations(file),
        Command::Classify { file } => commands::classify(file),
        Command::Apply { file, derivation, poly } => commands::apply(file, derivation, poly),
        Command::Kernel { file, derivation, poly, generate, structural, support, free } => {
            let bounds =
                KernelBounds { structural: *structural, support: *support, free: *free };
            commands::kernel(file, derivation, poly.as_deref(), *generate, bounds)
        }
        Command::Flow { file, derivation } => commands::flow(file, derivation, cli.cap),
        Command::Search { file, max_degree } => commands::search(file, *max_degree, cli.cap),
        Command::Check { file, pairs } => commands::check(file, *pairs, cli.cap, cli.seed),
    }
}

/// Write the report to stdout, treating a closed pipe as a normal stop
/// (the reader has everything it wants) rather than an error.
fn emit(text: &str) -> io::Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{text}")?;
    out.flush()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let text = if cli.machine {
                serde_json::to_string_pretty(&out.machine).expect("serializable")
            } else {
                out.human
            };
            match emit(&text) {
                Ok(()) => ExitCode::from(out.exit),
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::from(out.exit),
                Err(e) => {
                    let _ = writeln!(io::stderr(), "error: cannot write to stdout: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Err(err) => {
            eprintln!("error: {}", err.render());
            ExitCode::from(err.exit_code())
        }
    }
}
