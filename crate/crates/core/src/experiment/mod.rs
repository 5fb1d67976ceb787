//! Seeded experiments behind the `stl` command line: spectra of
//! contractions, power-iteration traces, phase-transition sweeps, the
//! fixed-point verification and the derivative check.
//!
//! Each command has a pure computation returning a serializable report and a
//! `run_*` wrapper that writes CSV and JSON files. Work items are independent
//! given their seeds and results are gathered in a fixed order, so output is
//! byte-identical for any thread count.

mod config;
mod derivative;
mod fixed_point;
pub mod output;
mod power_trace;
mod spectrum;
mod sweep;

use std::path::PathBuf;

pub use config::{parse_lambda_grid, Command, ExperimentConfig, DEFAULT_SEED, DERIVATIVE_MAX_DIM};
pub use derivative::{
    derivative_check, run_derivative_check, DerivativeCheckReport, DerivativeRow,
};
pub use fixed_point::{fixed_point_report, run_fixed_point, FixedPointReport, FixedPointRow};
pub use power_trace::{power_trace, run_power_trace, PowerTraceReport, TraceRun};
pub use spectrum::{run_spectrum, spectrum, SpectrumCase, SpectrumReport};
pub use sweep::{phase_sweep, run_phase_sweep, PhaseSweepReport, PhaseSweepRow, SweepPoint};

use crate::ensemble::SeedSpec;
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Numerical(#[from] Error),
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => EXIT_CONFIG,
            ExperimentError::Io { .. } => EXIT_IO,
            ExperimentError::Numerical(_) => EXIT_TOLERANCE,
        }
    }
}

/// What a run wrote and whether its checks passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_TOLERANCE
        }
    }
}

const MODEL_TAG: u64 = 1;
const PROBE_TAG: u64 = 2;
const RESTART_TAG: u64 = 3;
const INDEX_TAG: u64 = 4;

/// Stream of trial `trial` at grid position `point`.
pub fn task_seed(master: u64, point: usize, trial: usize) -> SeedSpec {
    SeedSpec::new(master, 0)
        .child(point as u64)
        .child(trial as u64)
}

/// Validates the config, then runs its command on a pool of
/// `config.threads` workers (all cores when unset).
pub fn run(config: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| ExperimentError::Config(format!("cannot start thread pool: {e}")))?;
    pool.install(|| match config.command {
        Command::Spectrum => run_spectrum(config),
        Command::PowerTrace => run_power_trace(config),
        Command::PhaseSweep => run_phase_sweep(config),
        Command::FixedPoint => run_fixed_point(config),
        Command::DerivativeCheck => run_derivative_check(config),
    })
}

fn expect_command(config: &ExperimentConfig, want: Command) -> Result<(), ExperimentError> {
    if config.command != want {
        return Err(ExperimentError::Config(format!(
            "config is for `{}`, not `{want}`",
            config.command
        )));
    }
    config.validate()
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
