//! `cnc`: simulate, decompose, enumerate and check qudit circuits and
//! phase-space operators from the command line.

mod commands;
mod error;
mod schema;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "cnc", version, about = "Classical simulation of qudit circuits with CNC phase points")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Output encoding.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json, global = true)]
    pub format: OutputFormat,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Qudit dimension; input files must agree.
    #[arg(long = "d", global = true)]
    pub d: Option<u32>,
    /// Number of qudits; input files must agree.
    #[arg(long = "n", global = true)]
    pub n: Option<usize>,
    /// Largest dense matrix dimension (d^n) the tool may build.
    #[arg(long, default_value_t = 250, global = true)]
    pub dense_cap: usize,
    /// Largest number of measurement branches d^m the oracle may visit.
    #[arg(long, default_value_t = 729, global = true)]
    pub max_branches: u128,
    #[arg(long, default_value_t = 100_000, global = true)]
    pub max_subspaces: usize,
    #[arg(long, default_value_t = 5000, global = true)]
    pub max_stabilizer_states: u128,
    /// Enumerated points in the default decomposition dictionary.
    #[arg(long, default_value_t = 2000, global = true)]
    pub dict_enumerated: usize,
    /// Clifford orbit size in the default decomposition dictionary.
    #[arg(long, default_value_t = 2000, global = true)]
    pub dict_orbit: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    /// Phase points over CNC sets.
    Cnc,
    /// Wigner points only (nonnegative Wigner inputs).
    Wigner,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Cnc => "cnc",
            Algorithm::Wigner => "wigner",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Feasibility,
    MinNegativity,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample measurement records of an adaptive Clifford circuit.
    Simulate {
        #[arg(long)]
        circuit: PathBuf,
        /// Ensemble (point list with weights), single phase point, or dense state.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Algorithm::Cnc)]
        algorithm: Algorithm,
        /// Compare against the dense Born-rule oracle.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 0.02)]
        tv_threshold: f64,
        /// Write the summary record here instead of after the shots.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Quasi-probability decomposition over phase points.
    Decompose {
        /// Phase point, dense operator, or dense state.
        #[arg(long)]
        state: PathBuf,
        /// `full`, `wigner`, or a point-list file.
        #[arg(long, default_value = "full")]
        dictionary: String,
        #[arg(long, value_enum, default_value_t = Mode::MinNegativity)]
        mode: Mode,
        /// Rational arithmetic (d = 3).
        #[arg(long)]
        exact: bool,
    },
    /// Count (and optionally list) phase points.
    Enumerate {
        /// Largest number of noncommuting generators; defaults to d*n + 1.
        #[arg(long)]
        max_xi: Option<usize>,
        #[arg(long)]
        list: bool,
        #[arg(long, default_value_t = 10_000)]
        max_points: u64,
        #[arg(long, default_value_t = 0)]
        start_index: u64,
    },
    /// Test membership of an operator in the stabilizer-positive polytope.
    Lambda {
        #[arg(long)]
        operator: PathBuf,
    },
    /// Run the bundled simulator-versus-oracle checks.
    Verify {
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.02)]
        threshold: f64,
    },
    /// Print a bundled JSON Schema (`list` prints the names).
    Schema { name: String },
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("CNC_THREADS") else {
        return Ok(());
    };
    let k: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&k| k > 0)
        .ok_or_else(|| CliError::usage(format!("CNC_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .map_err(|e| CliError::usage(format!("thread pool: {e}")))
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
    match configure_threads().and_then(|_| commands::run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
