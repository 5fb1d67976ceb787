use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use super::ExperimentError;
use crate::tensor::MAX_ORDER;

/// Largest dimension accepted by the derivative check, which re-solves two
/// perturbed eigenpairs per index.
pub const DERIVATIVE_MAX_DIM: usize = 60;

const MAX_GRID_POINTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    PowerTrace,
    PhaseSweep,
    FixedPoint,
    DerivativeCheck,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Spectrum,
        Command::PowerTrace,
        Command::PhaseSweep,
        Command::FixedPoint,
        Command::DerivativeCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::PowerTrace => "power-trace",
            Command::PhaseSweep => "phase-sweep",
            Command::FixedPoint => "fixed-point",
            Command::DerivativeCheck => "derivative-check",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| ExperimentError::Config(format!("unknown command `{s}`")))
    }
}

/// Effective configuration of one run.
///
/// Everything that influences the computed numbers is serialized into the
/// output headers. The output directory and thread count are not, so that
/// identical computations produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub d: usize,
    pub n: usize,
    /// Signal strengths, in the order they are swept.
    pub lambdas: Vec<f64>,
    /// Trials per signal strength; for `derivative-check`, the number of
    /// multi-indices tested.
    pub trials: usize,
    /// Random power-iteration starts per tensor.
    pub restarts: usize,
    pub seed: u64,
    /// Power-iteration objective tolerance, or the root-finding tolerance
    /// for `fixed-point`.
    pub tol: f64,
    #[serde(skip)]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub threads: Option<usize>,
}

/// Master seed used when neither the flag nor the environment sets one.
pub const DEFAULT_SEED: u64 = 20_240_601;

impl ExperimentConfig {
    /// Desk-scale defaults for each command.
    pub fn defaults(command: Command) -> Self {
        let base = Self {
            command,
            d: 3,
            n: 150,
            lambdas: vec![0.0],
            trials: 20,
            restarts: 10,
            seed: DEFAULT_SEED,
            tol: 1e-10,
            output_dir: PathBuf::from("stl-out"),
            threads: None,
        };
        match command {
            Command::Spectrum => Self {
                n: 400,
                trials: 1,
                ..base
            },
            Command::PowerTrace => Self {
                n: 500,
                lambdas: vec![5.0],
                trials: 1,
                restarts: 1,
                ..base
            },
            Command::PhaseSweep => Self {
                lambdas: parse_lambda_grid("0.5:4:0.5").expect("valid default grid"),
                ..base
            },
            Command::FixedPoint => Self {
                lambdas: parse_lambda_grid("1.2:5:0.1").expect("valid default grid"),
                tol: 1e-12,
                ..base
            },
            Command::DerivativeCheck => Self {
                n: 30,
                lambdas: vec![3.0],
                trials: 12,
                restarts: 4,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if !(3..=MAX_ORDER).contains(&self.d) {
            return bad(format!("--d must lie in 3..={MAX_ORDER}, got {}", self.d));
        }
        if self.command != Command::FixedPoint && self.n < 2 {
            return bad(format!("--n must be at least 2, got {}", self.n));
        }
        if self.command == Command::DerivativeCheck {
            if self.n > DERIVATIVE_MAX_DIM {
                return bad(format!(
                    "derivative-check is limited to --n <= {DERIVATIVE_MAX_DIM}, got {}",
                    self.n
                ));
            }
            if self.n < self.d {
                return bad(format!(
                    "derivative-check needs --n >= --d to cover every multiplicity class, got n = {}",
                    self.n
                ));
            }
        }
        if self.lambdas.is_empty() {
            return bad("the lambda grid is empty".into());
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return bad(format!("signal strengths must be finite and >= 0, got {l}"));
        }
        if self.command == Command::FixedPoint {
            if let Some(l) = self.lambdas.iter().find(|l| **l <= 0.0) {
                return bad(format!(
                    "fixed-point needs positive signal strengths, got {l}"
                ));
            }
        }
        if self.trials == 0 {
            return bad("--trials must be at least 1".into());
        }
        if self.restarts == 0 {
            return bad("--restarts must be at least 1".into());
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("--tol must be positive, got {}", self.tol));
        }
        if self.threads == Some(0) {
            return bad("--threads must be at least 1".into());
        }
        Ok(())
    }
}

/// Parses `start:stop:step` into the inclusive grid `start + k·step`.
pub fn parse_lambda_grid(spec: &str) -> Result<Vec<f64>, ExperimentError> {
    let bad = || {
        ExperimentError::Config(format!(
            "lambda grid must be START:STOP:STEP with STEP > 0 and STOP >= START, got `{spec}`"
        ))
    };
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0 && stop >= start && start.is_finite() && stop.is_finite()) {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > MAX_GRID_POINTS {
        return Err(ExperimentError::Config(format!(
            "lambda grid has {count} points, more than {MAX_GRID_POINTS}"
        )));
    }
    // snap to 12 decimals so 0.1 steps give 2.4 rather than 2.4000000000000004
    Ok((0..count)
        .map(|k| {
            let x = start + k as f64 * step;
            format!("{x:.12}").parse().unwrap_or(x)
        })
        .collect())
}
