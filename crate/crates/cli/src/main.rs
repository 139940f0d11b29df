//! `graphctl`: command-line front end for boundary control on metric trees.

mod commands;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "graphctl", version, about = "Boundary control of wave, heat and Schrödinger equations on metric trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optical distances, diameter, centre and boundary eccentricities.
    Geometry(Common),
    /// Eigenvalues and boundary traces, with a Weyl-law check.
    Spectrum(Common),
    /// Gram conditioning sweeps over the horizon and the mode count, and
    /// the biorthogonal growth fit.
    BasisReport(Common),
    /// Minimal-norm control for the chosen equation.
    Synthesize(Common),
    /// Forward simulation driven by a control CSV.
    Simulate(Simulate),
    /// Synthesize, simulate, cross-check and compare against tolerances.
    Verify(Common),
}

#[derive(Args, Clone)]
pub struct Common {
    /// Graph file or preset (`interval`, `star`, `weighted-star`).
    #[arg(long, default_value = "interval")]
    pub graph: String,
    /// Number of modes K.
    #[arg(long = "modes", default_value_t = 10)]
    pub modes: usize,
    /// Elements per edge (default: scaled to optical length and K).
    #[arg(long)]
    pub mesh: Option<usize>,
    /// Control horizon (default: critical wave time, 0.5 for heat, 0.1 for
    /// Schrödinger).
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Boundary vertex left uncontrolled.
    #[arg(long = "exclude-vertex")]
    pub exclude_vertex: Option<usize>,
    #[arg(long, default_value = "wave")]
    pub equation: graphctl::Equation,
    /// Target (wave) or initial state: `mode1`, `modes12`, `random`, `zero`
    /// or a JSON file `{"a": [...], "b": [...]}`.
    #[arg(long, default_value = "random")]
    pub target: String,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Clone)]
pub struct Simulate {
    #[command(flatten)]
    pub common: Common,
    /// Control CSV written by `synthesize`.
    #[arg(long)]
    pub control: PathBuf,
    /// Number of output time steps.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Geometry(c) => commands::geometry(&c),
        Command::Spectrum(c) => commands::spectrum(&c),
        Command::BasisReport(c) => commands::basis_report(&c),
        Command::Synthesize(c) => commands::synthesize(&c),
        Command::Simulate(s) => commands::simulate(&s),
        Command::Verify(c) => commands::verify(&c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
