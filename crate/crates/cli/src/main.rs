use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, ValueEnum};
use stl_core::ensemble::SEED_ENV;
use stl_core::experiment::{
    parse_lambda_grid, run, Command, ExperimentConfig, ExperimentError, EXIT_CONFIG, EXIT_OK,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CommandArg {
    /// Spectra of contractions against the semicircle law
    Spectrum,
    /// Per-iteration spectra and objective of one power iteration
    PowerTrace,
    /// Alignment and spectral norm across signal strengths
    PhaseSweep,
    /// Fixed-point solutions against the closed forms and thresholds
    FixedPoint,
    /// Analytic eigenpair derivatives against finite differences
    DerivativeCheck,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Spectrum => Command::Spectrum,
            CommandArg::PowerTrace => Command::PowerTrace,
            CommandArg::PhaseSweep => Command::PhaseSweep,
            CommandArg::FixedPoint => Command::FixedPoint,
            CommandArg::DerivativeCheck => Command::DerivativeCheck,
        }
    }
}

/// Experiments on the symmetric rank-one spiked tensor model.
///
/// Unset options take per-command defaults. The master seed comes from
/// --seed, then the STL_SEED environment variable, then a fixed default.
/// Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 tolerance
/// failure.
#[derive(Debug, Parser)]
#[command(name = "stl", version)]
struct Cli {
    #[arg(value_enum)]
    command: CommandArg,
    /// Tensor order
    #[arg(long)]
    d: Option<usize>,
    /// Dimension
    #[arg(long)]
    n: Option<usize>,
    /// Single signal strength
    #[arg(long, allow_negative_numbers = true, conflicts_with = "lambda_grid")]
    lambda: Option<f64>,
    /// Inclusive grid of signal strengths
    #[arg(long, value_name = "START:STOP:STEP")]
    lambda_grid: Option<String>,
    /// Trials per signal strength (indices tested for derivative-check)
    #[arg(long)]
    trials: Option<usize>,
    /// Random power-iteration starts per tensor
    #[arg(long)]
    restarts: Option<usize>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Iteration or root-finding tolerance
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (all cores when unset)
    #[arg(long)]
    threads: Option<usize>,
}

fn resolve_seed(flag: Option<u64>, env: Option<String>) -> Result<Option<u64>, ExperimentError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match env {
        None => Ok(None),
        Some(s) => s.trim().parse().map(Some).map_err(|_| {
            ExperimentError::Config(format!(
                "{SEED_ENV} must be an unsigned 64-bit integer, got `{s}`"
            ))
        }),
    }
}

fn build_config(cli: Cli) -> Result<ExperimentConfig, ExperimentError> {
    let mut c = ExperimentConfig::defaults(cli.command.into());
    if let Some(d) = cli.d {
        c.d = d;
    }
    if let Some(n) = cli.n {
        c.n = n;
    }
    if let Some(l) = cli.lambda {
        c.lambdas = vec![l];
    }
    if let Some(g) = &cli.lambda_grid {
        c.lambdas = parse_lambda_grid(g)?;
    }
    if let Some(t) = cli.trials {
        c.trials = t;
    }
    if let Some(r) = cli.restarts {
        c.restarts = r;
    }
    if let Some(s) = resolve_seed(cli.seed, std::env::var(SEED_ENV).ok())? {
        c.seed = s;
    }
    if let Some(t) = cli.tol {
        c.tol = t;
    }
    if let Some(o) = cli.out {
        c.output_dir = o;
    }
    c.threads = cli.threads;
    c.validate()?;
    Ok(c)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
            return ExitCode::from(code as u8);
        }
    };
    let outcome = build_config(cli).and_then(|c| {
        let o = run(&c)?;
        Ok((c, o))
    });
    match outcome {
        Ok((config, o)) => {
            for f in &o.files {
                println!("wrote {}", f.display());
            }
            for f in &o.failures {
                eprintln!("FAIL {f}");
            }
            println!(
                "{} seed={} {}",
                config.command,
                config.seed,
                if o.passed { "PASS" } else { "FAIL" }
            );
            ExitCode::from(o.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("stl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
