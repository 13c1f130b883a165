use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

/// Quasi-classical and exact eigensections of the monopole Laplacian on the sphere.
#[derive(Parser)]
#[command(name = "monopole", version)]
struct Cli {
    /// JSON file whose keys mirror the command-line flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for the report files (default: current directory)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format: csv (with a JSON sidecar) or json
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
pub struct Label {
    #[arg(long = "N")]
    pub n: Option<i64>,
    #[arg(long)]
    pub j: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<i64>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Exact and Bohr–Sommerfeld levels for j = 0..=j-max
    Spectrum {
        #[arg(long = "N")]
        n: Option<i64>,
        #[arg(long = "j-max")]
        j_max: Option<i64>,
    },
    /// Sampled monopole harmonic Y_{N,j,k}
    Exact {
        #[command(flatten)]
        label: Label,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_parser = ["u1", "u2"])]
        chart: Option<String>,
    },
    /// Sampled almost-eigensection U_{N,j,k}
    Wkb {
        #[command(flatten)]
        label: Label,
        #[arg(long, value_parser = ["u1", "u2"])]
        chart: Option<String>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_parser = ["osc", "airy", "auto"])]
        form: Option<String>,
    },
    /// Comparison report of U_{N,j,k} against Y_{N,j,k}
    Compare {
        #[command(flatten)]
        label: Label,
        /// Gauss nodes per segment before doubling
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Comparison reports along a family of labels
    Sweep {
        /// j as an integer or a multiple of N, e.g. 1 or N/4
        #[arg(long)]
        j: Option<String>,
        /// k as an integer or a multiple of N, e.g. N/2
        #[arg(long)]
        k: Option<String>,
        #[arg(long = "N-list", value_delimiter = ',')]
        n_list: Option<Vec<i64>>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Magnetic geodesic flow from a point of the torus Λ(E, P)
    Flow {
        #[arg(long = "E")]
        e: Option<f64>,
        #[arg(long = "P", allow_negative_numbers = true)]
        p: Option<f64>,
        /// starting colatitude (default: middle of the band)
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        phi: Option<f64>,
        #[arg(long, value_parser = ["plus", "minus"])]
        branch: Option<String>,
        /// signed duration
        #[arg(long = "T", allow_negative_numbers = true)]
        t: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Numerical Maslov index at a fold of Λ(E, P)
    Maslov {
        #[arg(long = "E")]
        e: Option<f64>,
        #[arg(long = "P", allow_negative_numbers = true)]
        p: Option<f64>,
        #[arg(long, value_parser = ["min", "max"])]
        end: Option<String>,
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
}

/// 2 for invalid input, 3 for numerical failures, 4 for degenerate refusals.
fn exit_code(err: &anyhow::Error) -> u8 {
    use monopole_core::Error::*;
    match err.downcast_ref::<monopole_core::Error>() {
        Some(Domain(_) | EmptyTorus { .. } | BundleMismatch { .. }) => 2,
        Some(
            Numerical(_) | Resolution(_) | Divergence(_) | Inconsistency(_) | PoleProximity { .. } | FoldRegion { .. },
        ) => 3,
        Some(Degenerate(_)) => 4,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command, cli.config.as_deref(), cli.out, cli.format) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("monopole: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
