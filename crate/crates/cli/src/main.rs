//! `jetsuita`: minimal jet-interpolation integrals, concavity scans and the
//! Suita-type bound from JSON problem files.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "jetsuita", version)]
#[command(about = "Minimal L2 integrals with jet interpolation, concavity scans and the weighted-jets Suita bound")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Green function of the unit disc, G(z, z0) = log|(z - z0)/(1 - conj(z0) z)|.
    Green {
        /// Pole, as `re` or `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        z0: String,
        /// Evaluation points; repeat for a table.
        #[arg(long, required = true, allow_hyphen_values = true)]
        z: Vec<String>,
    },
    /// Logarithmic capacity c_beta(z0) = 1/(1 - |z0|^2) of the unit disc.
    Capacity {
        /// Points; repeat for a table.
        #[arg(long, required = true, allow_hyphen_values = true)]
        z0: Vec<String>,
    },
    /// Print a built-in problem with every default filled in.
    Problem {
        /// `appendix`, `single_point` or `epsilon_bump`.
        name: String,
    },
    /// Minimal integral G(t) with its extremal form and diagnostics.
    Solve {
        /// Problem file or built-in name.
        problem: String,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Scan G(h^-1(r)) on an r-grid and test concavity and linearity.
    Scan {
        problem: String,
        /// Grid size; defaults to the problem's `numerics.r_count`.
        #[arg(long)]
        r_count: Option<usize>,
        /// Write `r,t,G,second_difference` rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write two-column `r G` data for gnuplot here.
        #[arg(long)]
        emit_plot_data: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Compare the minimal integral with the extension bound and the equality criteria.
    Suita {
        problem: String,
        #[command(flatten)]
        out: Output,
    },
    /// The two-point disc example against its closed-form values.
    Appendix {
        /// Jet parameters; defaults to -1/3, 0.25, 1, -1.
        #[arg(long, allow_hyphen_values = true)]
        a: Vec<f64>,
        /// Print JSON rows instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Check the mass and orthogonality identities for psi.
    VerifyLemmas {
        /// Problem file or built-in name; psi is taken from it.
        problem: Option<String>,
        /// Poles of psi as `re,im:p` (psi = 2 sum p G(., z)); overrides the problem.
        #[arg(long, allow_hyphen_values = true)]
        pole: Vec<String>,
        /// Highest degree n of the test forms z^n dz.
        #[arg(long, default_value_t = 3)]
        max_degree: usize,
        #[arg(long, default_value_t = 1e-3)]
        mass_tolerance: f64,
        #[arg(long, default_value_t = 1e-6)]
        orthogonality_tolerance: f64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Debug, Clone, clap::Args)]
pub struct Output {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(commands::Status::Ok) => ExitCode::SUCCESS,
        Ok(commands::Status::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
