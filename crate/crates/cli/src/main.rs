//! `rfda`: secrecy-region analysis for random frequency diverse arrays.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rfda_core::freq::GenerationMethod;
use rfda_core::region::SchemeKind;
use rfda_core::scenario::Mode;
use rfda_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "rfda",
    version,
    about = "Secrecy-region analysis for random frequency diverse arrays"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Scenario file (JSON). Defaults are used for anything it leaves out.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for frequency-vector draws and Monte Carlo trials.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Monte Carlo trials per grid point.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub trials: usize,
    /// Output directory; each run writes into `<out>/<run-id>/`.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Also write `plot.svg`.
    #[arg(long, global = true)]
    pub svg: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum ModeArg {
    Lb,
    Mc,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Lb => Mode::AnalyticLb,
            ModeArg::Mc => Mode::MonteCarlo,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum SchemeArg {
    An,
    NoAn,
    Both,
}

impl SchemeArg {
    pub fn schemes(self) -> Vec<SchemeKind> {
        match self {
            SchemeArg::An => vec![SchemeKind::WithAn],
            SchemeArg::NoAn => vec![SchemeKind::WithoutAn],
            SchemeArg::Both => SchemeKind::ALL.to_vec(),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum MethodArg {
    Projection,
    Eigen,
}

impl From<MethodArg> for GenerationMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Projection => GenerationMethod::Projection,
            MethodArg::Eigen => GenerationMethod::Eigen,
        }
    }
}

/// Scenario fields that can be overridden per invocation.
#[derive(Args, Debug, Clone, Default)]
pub struct Overrides {
    /// Number of array elements.
    #[arg(long = "m")]
    pub elements: Option<usize>,
    #[arg(long)]
    pub pt_dbm: Option<f64>,
    /// Fraction of transmit power given to the confidential signal.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Use this frequency-table row (e.g. K10405) instead of a generated vector.
    #[arg(long)]
    pub fixture: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Smallest element count for a boundary correlation.
    Mmin {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        dtheta_deg: Option<f64>,
        #[arg(long)]
        theta_b_deg: Option<f64>,
    },
    /// Smallest frequency-vector energy K for a boundary correlation.
    Kmin {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        dr_m: Option<f64>,
        /// Element count; defaults to the real-valued minimum.
        #[arg(long = "m")]
        elements: Option<f64>,
        #[arg(long)]
        dtheta_deg: Option<f64>,
        #[arg(long)]
        theta_b_deg: Option<f64>,
    },
    /// Boundary correlation, ellipse semi-axes and resource minima.
    Region {
        /// Use this correlation instead of the computed boundary value.
        #[arg(long)]
        beta: Option<f64>,
        #[command(flatten)]
        over: Overrides,
    },
    /// Draw a frequency vector with zero range-angle coupling.
    GenK {
        #[arg(long = "m")]
        elements: Option<usize>,
        /// Target energy kᵀk; defaults to the scenario's.
        #[arg(long)]
        k_target: Option<f64>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Normalized beampattern over a range-angle grid, as CSV.
    Beampattern {
        #[arg(long)]
        r_min: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        r_step: f64,
        #[arg(long)]
        theta_min_deg: Option<f64>,
        #[arg(long)]
        theta_max_deg: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        theta_step_deg: f64,
        /// Second-order approximation instead of the exact pattern.
        #[arg(long)]
        taylor: bool,
        #[command(flatten)]
        over: Overrides,
    },
    /// Secrecy capacity of the scenario for each scheme.
    Capacity {
        #[arg(long, value_enum, default_value = "both")]
        scheme: SchemeArg,
        #[command(flatten)]
        over: Overrides,
    },
    /// Run a parameter sweep and write result.csv and manifest.json.
    Sweep {
        #[command(subcommand)]
        kind: SweepKind,
    },
    /// Check the frequency table against its nominal energies and spans.
    ValidateFixtures {
        /// Table CSV in MHz; defaults to the built-in table.
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct SweepCommon {
    #[arg(long, value_enum, default_value = "both")]
    pub scheme: SchemeArg,
    #[arg(long)]
    pub start: Option<f64>,
    #[arg(long)]
    pub stop: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[command(flatten)]
    pub over: Overrides,
}

#[derive(Subcommand, Debug)]
pub enum SweepKind {
    /// Capacity versus transmit power in dBm (default grid 0..30 step 1).
    Power(SweepCommon),
    /// Capacity versus power allocation factor (default grid 0.05..0.95 step 0.05).
    Delta(SweepCommon),
    /// Capacity across the frequency-table rows.
    Bandwidth(SweepCommon),
    /// Minimum element count versus secrecy rate (default grid 0.5..6 step 0.5).
    Rate {
        #[command(flatten)]
        common: SweepCommon,
        /// Explicit rate points in bits, comma separated; replaces the grid.
        #[arg(long, value_delimiter = ',')]
        rs: Vec<f64>,
    },
}

/// Process exit status for a library error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_) | Error::Config(_) => 2,
        Error::Infeasible(_) => 3,
        Error::Convergence(_) | Error::RetryRequired(_) => 4,
        Error::Parse { .. } | Error::Io { .. } => 5,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
