//! `epchiral`: locate exceptional points of `H(λ) = H0 + λ·H1`, follow
//! eigenvalues around them and report their chirality.

mod commands;
mod complex_arg;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use epchiral::Complex64;

use complex_arg::{parse_complex, parse_pair};

#[derive(Debug, Parser)]
#[command(
    name = "epchiral",
    version,
    about = "Exceptional points of complex-symmetric matrix pencils"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Pencil file {"n", "h0", "h1"}.
    #[arg(long, global = true, conflicts_with = "two_level")]
    pub pencil: Option<PathBuf>,
    /// Two-level parameter file {"eps1", "eps2", "omega1", "omega2", "phi"}.
    #[arg(long, global = true)]
    pub two_level: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Eigenpair residual bound (relative to the spectral scale).
    #[arg(long, global = true)]
    pub tol_eig: Option<f64>,
    /// Newton residual required at an exceptional point.
    #[arg(long, global = true)]
    pub tol_newton: Option<f64>,
    /// Seed for random pencil generation.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct Interval {
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub from: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub to: f64,
    #[arg(long, default_value_t = 600)]
    pub steps: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigensystem at one λ.
    Eigs {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: Complex64,
    },
    /// Continued eigenvalue tracks over a real interval and the repulsion seeds.
    Sweep {
        #[command(flatten)]
        interval: Interval,
    },
    /// Random pencil with symmetric standard-normal entries.
    Demo {
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
    /// Exceptional points attached to the real-axis repulsions.
    FindEp {
        #[command(flatten)]
        interval: Interval,
        /// Also compute the chirality of every EP.
        #[arg(long)]
        chirality: bool,
    },
    /// Monodromy of a circular loop.
    Loop {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        center: Complex64,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 256)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        turns: usize,
        /// Traverse the loop clockwise.
        #[arg(long)]
        reverse: bool,
    },
    /// Energy and width crossings along λ = t + i·offset.
    Crossing {
        /// Starting guess for the EP; refined by Newton.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        ep: Complex64,
        #[arg(long, allow_hyphen_values = true)]
        offset: f64,
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 400)]
        steps: usize,
    },
    /// Effective two-level model of the pair coalescing at an EP.
    Reduce {
        /// Starting guess for the EP; refined by Newton.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        ep: Complex64,
        /// Real reference point (default: the real part of the EP's seed).
        #[arg(long, allow_hyphen_values = true)]
        lambda_ref: Option<f64>,
        /// Levels to project on, `a,b` with b = a+1 (default: the EP's pair).
        #[arg(long, value_parser = parse_pair)]
        pair: Option<(usize, usize)>,
        /// Half width of the comparison window (default 1.5·|Im λ_c|).
        #[arg(long)]
        half_width: Option<f64>,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Chirality of the state coalescing at an EP.
    Chirality {
        /// Starting guess for the EP; refined by Newton.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        ep: Complex64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
