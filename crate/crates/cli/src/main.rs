mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qberry_core::verify::DEFAULT_SEED;
use qberry_core::{QuadrupoleComponent, Suite};

use commands::{Common, EvolveArgs, HamiltonianSource, LoopArgs, LoopKind};
use error::CliError;
use output::Format;

/// Spin-1 geometric phases: Majorana stars, loop phases, spectra, dynamics.
#[derive(Debug, Parser)]
#[command(name = "qberry", version)]
struct Cli {
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Loop or trajectory sample count.
    #[arg(long, global = true, env = "QBERRY_DEFAULT_SAMPLES")]
    samples: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Majorana stars of a state.
    Stars {
        /// State JSON, `{"amps": [[re, im], ...]}`.
        #[arg(long)]
        input: PathBuf,
    },
    /// Geometric phase of a closed loop by both routes.
    LoopPhase {
        #[arg(long, value_enum)]
        kind: LoopKind,
        /// Start state (exchange, individual) or loop JSON (file).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Director polar angle of the start state when no input is given.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
        phi: f64,
        /// Rotation axis of an individual loop.
        #[arg(long, value_parser = parse_triple, default_value = "0,0,1", allow_hyphen_values = true)]
        axis: [f64; 3],
        /// Real endpoints `r,s,t` fixing a geodesic loop.
        #[arg(long, value_parser = parse_triple, default_value = "1,0,0", allow_hyphen_values = true)]
        from: [f64; 3],
        #[arg(long, value_parser = parse_triple, default_value = "1,1,0", allow_hyphen_values = true)]
        to: [f64; 3],
    },
    /// Eigenvalues, eigenstate stars and axis angles of a Hamiltonian.
    Spectrum {
        /// Operator JSON, `{"entries": [[[re, im], ...], ...]}`.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        quadrupole: Option<QuadrupoleComponent>,
        /// Planar family `cos(theta) Q_{x2-y2} + sin(theta) Q_xy`.
        #[arg(long, allow_negative_numbers = true)]
        theta: Option<f64>,
    },
    /// Sampled time evolution with star trajectories.
    Evolve {
        /// Spin field `a,b,c` of `H' = -a S'x + b S'y + c S'z`.
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        field: Option<[f64; 3]>,
        /// Hamiltonian operator JSON instead of a spin field.
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
        #[arg(long)]
        quadrupole: Option<QuadrupoleComponent>,
        /// Initial state JSON.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Initial state as the quadrupolar image of the real vector `r,s,t`.
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        real: Option<[f64; 3]>,
        /// Horizon in field periods (units of 2 pi for other Hamiltonians).
        #[arg(long, default_value_t = 1.0)]
        periods: f64,
        /// Exit with status 4 if the state leaves the quadrupolar subspace.
        #[arg(long)]
        require_quadrupolar: bool,
    },
    /// Eigenstate loops of the morphed planar family and their classes.
    Morph {
        #[arg(long, value_delimiter = ',', default_values_t = commands::default_alphas())]
        alpha: Vec<f64>,
    },
    /// Run acceptance checks.
    Verify {
        #[arg(long, default_value_t = Suite::All)]
        suite: Suite,
    },
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|p| format!("expected 3 comma-separated numbers, got {}", p.len()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = Common { output: cli.output, format: cli.format, seed: cli.seed, samples: cli.samples };
    match cli.command {
        Command::Stars { input } => commands::stars(&common, &input),
        Command::LoopPhase { kind, input, theta, phi, axis, from, to } => {
            commands::loop_phase(&common, &LoopArgs { kind, input, theta, phi, axis, from, to })
        }
        Command::Spectrum { input, quadrupole, theta } => {
            commands::spectrum(&common, &HamiltonianSource { input, quadrupole }, theta)
        }
        Command::Evolve { field, hamiltonian, quadrupole, input, real, periods, require_quadrupolar } => {
            let hamiltonian = HamiltonianSource { input: hamiltonian, quadrupole };
            commands::evolve(&common, &EvolveArgs { field, hamiltonian, input, real, periods, require_quadrupolar })
        }
        Command::Morph { alpha } => commands::morph(&common, &alpha),
        Command::Verify { suite } => commands::verify(&common, suite),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
