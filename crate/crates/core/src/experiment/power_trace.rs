use rayon::prelude::*;
use serde::Serialize;

use super::output::{fmt_f64, fmt_opt, prepare_dir, write_csv, write_json, Header, Table};
use super::{
    expect_command, task_seed, Command, ExperimentConfig, ExperimentError, Outcome, MODEL_TAG,
    PROBE_TAG,
};
use crate::ensemble::{sample_spiked_model, sample_unit_vector};
use crate::landscape::{power_iteration_with, LocalMaxCertificate, PowerOptions};
use crate::linalg::dot;
use crate::spectral::eigvalsh;

/// Slack allowed per step when checking that the objective never decreases.
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub iteration: usize,
    pub objective: f64,
    pub alignment: f64,
    #[serde(skip)]
    pub spectrum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRun {
    pub lambda: f64,
    pub trial: usize,
    pub converged: bool,
    pub iterations: usize,
    pub mu: f64,
    pub residual: f64,
    pub alignment: f64,
    pub certificate: Option<LocalMaxCertificate>,
    /// Smallest `f(v_{k+1}) - f(v_k)` along the trace.
    pub min_increment: f64,
    pub monotone: bool,
    #[serde(skip)]
    pub steps: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerTraceReport {
    pub runs: Vec<TraceRun>,
    pub passed: bool,
}

/// One power iteration per spiked tensor, recording the spectrum of
/// `Y·v_k^{d-2}`, the objective and the alignment at every iterate.
///
/// The iteration uses the auto shift and no Newton polishing, so every
/// recorded step is a power step.
pub fn power_trace(config: &ExperimentConfig) -> Result<PowerTraceReport, ExperimentError> {
    expect_command(config, Command::PowerTrace)?;
    let (d, n) = (config.d, config.n);
    let opts = PowerOptions {
        tol: config.tol,
        ..PowerOptions::default()
    };
    let mut runs = Vec::new();
    for (p, &lambda) in config.lambdas.iter().enumerate() {
        for t in 0..config.trials {
            let seed = task_seed(config.seed, p, t);
            let model = sample_spiked_model(lambda, d, n, seed.child(MODEL_TAG), None)?;
            let y = model.observation();
            let v0 = sample_unit_vector(n, seed.child(PROBE_TAG))?;
            let mut iterates: Vec<(usize, Vec<f64>, f64)> = Vec::new();
            let mut hook = |k: usize, v: &[f64], f: f64| iterates.push((k, v.to_vec(), f));
            let result = power_iteration_with(y, &v0, &opts, Some(&mut hook))?;
            let steps: Vec<TraceStep> = iterates
                .par_iter()
                .map(|(k, v, f)| -> crate::Result<TraceStep> {
                    Ok(TraceStep {
                        iteration: *k,
                        objective: *f,
                        alignment: dot(model.spike(), v).abs(),
                        spectrum: eigvalsh(&y.contract_to_matrix(v)?.matrix)?,
                    })
                })
                .collect::<crate::Result<_>>()?;
            let min_increment = steps
                .windows(2)
                .map(|w| w[1].objective - w[0].objective)
                .fold(f64::INFINITY, f64::min);
            let result = result.with_spike(model.spike());
            runs.push(TraceRun {
                lambda,
                trial: t,
                converged: result.converged,
                iterations: result.iterations,
                mu: result.mu,
                residual: result.residual,
                alignment: result.alignment.expect("spike is known"),
                certificate: result.certificate,
                min_increment,
                monotone: min_increment >= -MONOTONE_SLACK,
                steps,
            });
        }
    }
    let passed = runs.iter().all(|r| r.monotone && r.converged);
    Ok(PowerTraceReport { runs, passed })
}

/// Writes `power_trace.csv` (one row per iterate; the certificate columns are
/// filled on the final row only), `power_trace_spectra.csv` and a summary.
pub fn run_power_trace(config: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let report = power_trace(config)?;
    let header = Header::new(config);
    let mut trace = Table::new(&[
        "lambda",
        "trial",
        "iteration",
        "objective",
        "alignment",
        "top_eigenvalue",
        "second_eigenvalue",
        "is_local_max",
        "gap",
    ]);
    let mut spectra = Table::new(&["lambda", "trial", "iteration", "index", "eigenvalue"]);
    for r in &report.runs {
        let last = r.steps.len().saturating_sub(1);
        for (s_idx, s) in r.steps.iter().enumerate() {
            let k = s.spectrum.len();
            let cert = if s_idx == last { r.certificate } else { None };
            trace.push(vec![
                fmt_f64(r.lambda),
                r.trial.to_string(),
                s.iteration.to_string(),
                fmt_f64(s.objective),
                fmt_f64(s.alignment),
                fmt_f64(s.spectrum[k - 1]),
                fmt_f64(s.spectrum[k - 2]),
                cert.map(|c| c.is_local_max.to_string()).unwrap_or_default(),
                fmt_opt(cert.map(|c| c.gap)),
            ]);
            for (i, &x) in s.spectrum.iter().enumerate() {
                spectra.push(vec![
                    fmt_f64(r.lambda),
                    r.trial.to_string(),
                    s.iteration.to_string(),
                    i.to_string(),
                    fmt_f64(x),
                ]);
            }
        }
    }
    let dir = &config.output_dir;
    prepare_dir(dir)?;
    let files = vec![
        write_csv(dir, "power_trace.csv", &header, &trace)?,
        write_csv(dir, "power_trace_spectra.csv", &header, &spectra)?,
        write_json(dir, "power_trace_summary.json", &header, &report)?,
    ];
    let failures = report
        .runs
        .iter()
        .filter(|r| !(r.monotone && r.converged))
        .map(|r| {
            format!(
                "lambda={} trial={}: converged={} min objective increment {:e}",
                r.lambda, r.trial, r.converged, r.min_increment
            )
        })
        .collect();
    Ok(Outcome {
        passed: report.passed,
        files,
        failures,
    })
}
