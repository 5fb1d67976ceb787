use rayon::prelude::*;
use serde::Serialize;

use super::output::{fmt_f64, fmt_opt, prepare_dir, write_csv, write_json, Header, Table};
use super::{
    expect_command, mean_and_se, task_seed, Command, ExperimentConfig, ExperimentError, Outcome,
    MODEL_TAG, RESTART_TAG,
};
use crate::asymptotics::AsymptoticPrediction;
use crate::ensemble::sample_spiked_model;
use crate::landscape::{best_of_restarts, PowerOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseSweepRow {
    pub lambda: f64,
    pub trial: usize,
    pub alignment_measured: f64,
    pub alignment_sign: f64,
    pub mu_measured: f64,
    pub alpha_predicted: Option<f64>,
    pub mu_predicted: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub is_local_max: bool,
}

/// Trial statistics at one signal strength.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub trials: usize,
    pub converged: usize,
    pub alignment_mean: f64,
    pub alignment_se: f64,
    pub mu_mean: f64,
    pub mu_se: f64,
    pub prediction: AsymptoticPrediction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseSweepReport {
    pub points: Vec<SweepPoint>,
    #[serde(skip)]
    pub rows: Vec<PhaseSweepRow>,
}

/// Best-of-restarts estimates over the lambda grid, `trials` spiked tensors
/// per grid point.
pub fn phase_sweep(config: &ExperimentConfig) -> Result<PhaseSweepReport, ExperimentError> {
    expect_command(config, Command::PhaseSweep)?;
    let opts = PowerOptions {
        tol: config.tol,
        ..PowerOptions::polished()
    };
    let predictions: Vec<AsymptoticPrediction> = config
        .lambdas
        .iter()
        .map(|&l| AsymptoticPrediction::new(l, config.d, 1e-12))
        .collect::<crate::Result<_>>()?;
    let tasks: Vec<(usize, usize)> = (0..config.lambdas.len())
        .flat_map(|p| (0..config.trials).map(move |t| (p, t)))
        .collect();
    let rows: Vec<PhaseSweepRow> = tasks
        .par_iter()
        .map(|&(p, t)| -> crate::Result<PhaseSweepRow> {
            let lambda = config.lambdas[p];
            let seed = task_seed(config.seed, p, t);
            let model =
                sample_spiked_model(lambda, config.d, config.n, seed.child(MODEL_TAG), None)?;
            let best = best_of_restarts(
                model.observation(),
                config.restarts,
                seed.child(RESTART_TAG),
                &opts,
            )?
            .with_spike(model.spike());
            let pred = &predictions[p];
            Ok(PhaseSweepRow {
                lambda,
                trial: t,
                alignment_measured: best.alignment.expect("spike is known"),
                alignment_sign: best.alignment_sign.expect("spike is known"),
                mu_measured: best.mu,
                alpha_predicted: pred.alpha_inf,
                mu_predicted: pred.mu_inf,
                converged: best.converged,
                iterations: best.iterations,
                is_local_max: best.is_local_max(),
            })
        })
        .collect::<crate::Result<_>>()?;
    let points = predictions
        .into_iter()
        .enumerate()
        .map(|(p, prediction)| {
            let at: Vec<&PhaseSweepRow> = rows
                .iter()
                .filter(|r| r.lambda == config.lambdas[p])
                .collect();
            let align: Vec<f64> = at.iter().map(|r| r.alignment_measured).collect();
            let mu: Vec<f64> = at.iter().map(|r| r.mu_measured).collect();
            let (alignment_mean, alignment_se) = mean_and_se(&align);
            let (mu_mean, mu_se) = mean_and_se(&mu);
            SweepPoint {
                lambda: config.lambdas[p],
                trials: at.len(),
                converged: at.iter().filter(|r| r.converged).count(),
                alignment_mean,
                alignment_se,
                mu_mean,
                mu_se,
                prediction,
            }
        })
        .collect();
    Ok(PhaseSweepReport { points, rows })
}

pub const PHASE_SWEEP_COLUMNS: [&str; 10] = [
    "lambda",
    "trial",
    "alignment_measured",
    "alignment_sign",
    "mu_measured",
    "alpha_predicted",
    "mu_predicted",
    "converged",
    "iterations",
    "is_local_max",
];

pub(crate) fn phase_sweep_table(rows: &[PhaseSweepRow]) -> Table {
    let mut t = Table::new(&PHASE_SWEEP_COLUMNS);
    for r in rows {
        t.push(vec![
            fmt_f64(r.lambda),
            r.trial.to_string(),
            fmt_f64(r.alignment_measured),
            fmt_f64(r.alignment_sign),
            fmt_f64(r.mu_measured),
            fmt_opt(r.alpha_predicted),
            fmt_opt(r.mu_predicted),
            r.converged.to_string(),
            r.iterations.to_string(),
            r.is_local_max.to_string(),
        ]);
    }
    t
}

/// Writes `phase_sweep.csv` and `phase_sweep_summary.json`.
pub fn run_phase_sweep(config: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let report = phase_sweep(config)?;
    let header = Header::new(config);
    prepare_dir(&config.output_dir)?;
    let files = vec![
        write_csv(
            &config.output_dir,
            "phase_sweep.csv",
            &header,
            &phase_sweep_table(&report.rows),
        )?,
        write_json(
            &config.output_dir,
            "phase_sweep_summary.json",
            &header,
            &report,
        )?,
    ];
    Ok(Outcome {
        passed: true,
        files,
        failures: Vec::new(),
    })
}
