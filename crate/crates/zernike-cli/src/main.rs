//! `zernike` — command-line front end for the Zernike-mode optics toolkit.
//!
//! Subcommands: `eval` (pupil-plane mode grids), `fit` (grid → expansion),
//! `ft` (image-plane fields), `propagate` (Fresnel fields), `product`
//! (linearization tables), `spdc` (two-photon states + entanglement report),
//! `verify` (orthonormality suites).
//!
//! Every command is deterministic: identical flags produce byte-identical
//! files. Outputs are written to a temporary file and renamed into place, so
//! failures leave no partial files; each output gets a `<name>.config.json`
//! echo carrying the flag set and its hash.

mod commands;
mod config;

use clap::{Parser, Subcommand};

pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_BAD_FLAGS: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_GRID_COVERAGE: i32 = 4;
pub const EXIT_CONVERGENCE: i32 = 5;
pub const EXIT_EMPTY_STATE: i32 = 6;

/// Error carrying the process exit code.
#[derive(Debug)]
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

    pub fn bad_flags(message: impl Into<String>) -> Self {
        Self::new(EXIT_BAD_FLAGS, message)
    }
}

impl From<zernike_optics::Error> for CliError {
    fn from(err: zernike_optics::Error) -> Self {
        use zernike_optics::Error as E;
        let code = match &err {
            E::Io(_) | E::Parse(_) => EXIT_IO,
            E::Convergence(_) => EXIT_CONVERGENCE,
            E::EmptyState(_) => EXIT_EMPTY_STATE,
            _ => EXIT_BAD_FLAGS,
        };
        Self::new(code, err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        Self::new(EXIT_IO, err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "zernike",
    about = "Zernike-mode optics: evaluation, fitting, propagation, SPDC entanglement",
    version
)]
struct Cli {
    /// Worker thread cap for grid sampling (outputs do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample one Zernike mode on a pupil-plane grid (zero outside the disc).
    Eval(commands::EvalArgs),
    /// Fit a pupil-plane field grid to a Zernike expansion.
    Fit(commands::FitArgs),
    /// Fraunhofer transform of an expansion, sampled on an image-plane grid.
    Ft(commands::FtArgs),
    /// Fresnel propagation of an expansion to distance z.
    Propagate(commands::PropagateArgs),
    /// Linearization coefficients of a product of two modes.
    Product(commands::ProductArgs),
    /// Thin-crystal SPDC two-photon state and entanglement report.
    Spdc(commands::SpdcArgs),
    /// Run the orthonormality/invariant suites and report max deviations.
    Verify(commands::VerifyArgs),
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            std::process::exit(EXIT_BAD_FLAGS);
        }
        // ignore failure: the pool may already be initialized in tests
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let outcome = match cli.command {
        Command::Eval(args) => commands::eval(args),
        Command::Fit(args) => commands::fit(args),
        Command::Ft(args) => commands::ft(args),
        Command::Propagate(args) => commands::propagate(args),
        Command::Product(args) => commands::product(args),
        Command::Spdc(args) => commands::spdc(args),
        Command::Verify(args) => commands::verify(args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {}", err.message);
            std::process::exit(err.code);
        }
    }
}
