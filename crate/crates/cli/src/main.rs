//! `torus-norm`: unit balls, geodesic counts and moduli scans for
//! hyperbolic once-punctured tori.

mod commands;
mod output;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::Outcome;

pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_DOMAIN: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_IO: u8 = 74;

#[derive(Parser, Debug)]
#[command(
    name = "torus-norm",
    version,
    about = "Length norm of a hyperbolic once-punctured torus"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// `modular`, `random`, or a trace triple `x,y,z`
    #[arg(long, global = true, default_value = "modular")]
    pub moduli: String,
    #[arg(long = "precision-bits", global = true, default_value_t = 256)]
    pub precision_bits: u32,
    /// Target width of certified area intervals
    #[arg(long, global = true, default_value_t = 0.005)]
    pub eps: f64,
    /// Residual threshold for the identity checks of `verify`
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses all cores
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Number of random samples
    #[arg(long, global = true)]
    pub n: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Boundary vertices and certified area of the unit ball
    Ball,
    /// Primitive and total geodesic counts against the quadratic law
    Count(CountArgs),
    /// Run the invariant checks
    Verify,
    /// Cusp-family or systole scans
    Scan(ScanArgs),
}

#[derive(Args, Debug)]
pub struct CountArgs {
    /// Length bounds, comma separated
    #[arg(
        long = "L",
        required = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub lengths: Vec<f64>,
    /// Cross-check each count with the brute-force oracle
    #[arg(long)]
    pub oracle: bool,
    /// Count unoriented geodesics (half the lattice-point count)
    #[arg(long)]
    pub unoriented: bool,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    /// Symmetric cusp family
    #[arg(long, conflicts_with = "systole", required_unless_present = "systole")]
    pub cusp: bool,
    /// Systoles of random moduli points
    #[arg(long)]
    pub systole: bool,
    /// Pinching lengths for `--cusp`, comma separated
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        default_value = "1.0,0.5,0.2,0.1,0.05"
    )]
    pub s: Vec<f64>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(torus_norm::Error),
    Io(io::Error),
}

impl From<torus_norm::Error> for CliError {
    fn from(e: torus_norm::Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    if g.precision_bits < torus_norm::trace::MIN_PRECISION {
        return Err(CliError::Usage(format!(
            "--precision-bits must be at least {}",
            torus_norm::trace::MIN_PRECISION
        )));
    }
    if g.eps.is_nan() || g.eps <= 0.0 || g.tol.is_nan() || g.tol <= 0.0 {
        return Err(CliError::Usage("--eps and --tol must be positive".into()));
    }
    if g.format == Format::Svg && !matches!(cli.command, Command::Ball) {
        return Err(CliError::Usage(
            "--format svg is only available for `ball`".into(),
        ));
    }
    if g.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(g.threads)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Ball => commands::ball(g),
        Command::Count(args) => commands::count(g, args),
        Command::Verify => commands::verify(g),
        Command::Scan(args) => commands::scan(g, args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let out = cli.global.out.clone();
    let outcome = match run(cli) {
        Ok(o) => o,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(CliError::Domain(e)) => {
            eprintln!("error: {}: {e}", e.kind());
            return ExitCode::from(EXIT_DOMAIN);
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_IO);
        }
    };
    let written = match &out {
        Some(path) => fs::write(path, &outcome.body),
        None => io::stdout().lock().write_all(outcome.body.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_IO);
    }
    for line in &outcome.summary {
        eprintln!("{line}");
    }
    if outcome.failed {
        ExitCode::from(EXIT_VERIFY_FAILED)
    } else {
        ExitCode::SUCCESS
    }
}
