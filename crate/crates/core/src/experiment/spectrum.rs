use rayon::prelude::*;
use serde::Serialize;

use super::output::{fmt_f64, prepare_dir, write_csv, write_json, Header, Table};
use super::{
    expect_command, task_seed, Command, ExperimentConfig, ExperimentError, Outcome, MODEL_TAG,
    PROBE_TAG, RESTART_TAG,
};
use crate::ensemble::{sample_spiked_model, sample_unit_vector};
use crate::landscape::{best_of_restarts, PowerOptions};
use crate::spectral::{beta, plot_range, Histogram, SemicircleLaw, SpectralMeasure};

/// KS threshold for contractions with an independent unit vector.
pub const KS_INDEPENDENT: f64 = 0.05;
/// KS threshold for the bulk (top eigenvalue removed) at a critical point.
pub const KS_CRITICAL_BULK: f64 = 0.08;

const DENSITY_SAMPLES: usize = 401;

// measure plus (mu, converged) for the critical case
type CaseMeasure = (SpectralMeasure, Option<(f64, bool)>);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumCase {
    pub lambda: f64,
    pub trial: usize,
    /// `independent` or `critical`.
    pub case: &'static str,
    pub ks: f64,
    pub ks_threshold: f64,
    pub passed: bool,
    pub top_eigenvalue: f64,
    /// Tensor eigenvalue of the critical point (critical case only).
    pub mu: Option<f64>,
    pub converged: Option<bool>,
    #[serde(skip)]
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub beta_d: f64,
    pub plot_range: (f64, f64),
    pub cases: Vec<SpectrumCase>,
    pub passed: bool,
}

/// Spectra of `Y·v^{d-2}` for an independent uniform `v` and for the best
/// critical point found by power iteration.
pub fn spectrum(config: &ExperimentConfig) -> Result<SpectrumReport, ExperimentError> {
    expect_command(config, Command::Spectrum)?;
    let (d, n) = (config.d, config.n);
    let b = beta(d);
    let opts = PowerOptions {
        tol: config.tol,
        ..PowerOptions::polished()
    };
    let tasks: Vec<(usize, usize)> = (0..config.lambdas.len())
        .flat_map(|p| (0..config.trials).map(move |t| (p, t)))
        .collect();
    let pairs: Vec<[CaseMeasure; 2]> = tasks
        .par_iter()
        .map(|&(p, t)| -> crate::Result<_> {
            let seed = task_seed(config.seed, p, t);
            let model = sample_spiked_model(config.lambdas[p], d, n, seed.child(MODEL_TAG), None)?;
            let y = model.observation();
            let v = sample_unit_vector(n, seed.child(PROBE_TAG))?;
            let independent = SpectralMeasure::from_matrix(&y.contract_to_matrix(&v)?.matrix)?;
            let best = best_of_restarts(y, config.restarts, seed.child(RESTART_TAG), &opts)?;
            let critical = SpectralMeasure::from_matrix(&y.contract_to_matrix(&best.u)?.matrix)?;
            Ok([
                (independent, None),
                (critical, Some((best.mu, best.converged))),
            ])
        })
        .collect::<crate::Result<_>>()?;
    let top = pairs
        .iter()
        .flatten()
        .filter_map(|(m, _)| m.top())
        .fold(f64::NEG_INFINITY, f64::max);
    let range = plot_range(b, top);
    let mut cases = Vec::new();
    for (&(p, t), pair) in tasks.iter().zip(pairs) {
        for (measure, crit) in pair {
            let exclude = usize::from(crit.is_some());
            let ks = measure.ks_distance(d, exclude)?;
            let threshold = if crit.is_some() {
                KS_CRITICAL_BULK
            } else {
                KS_INDEPENDENT
            };
            cases.push(SpectrumCase {
                lambda: config.lambdas[p],
                trial: t,
                case: if crit.is_some() {
                    "critical"
                } else {
                    "independent"
                },
                ks,
                ks_threshold: threshold,
                passed: ks < threshold,
                top_eigenvalue: measure.top().expect("non-empty spectrum"),
                mu: crit.map(|c| c.0),
                converged: crit.map(|c| c.1),
                histogram: measure.histogram(range.0, range.1),
                eigenvalues: measure.eigenvalues().to_vec(),
            });
        }
    }
    let passed = cases.iter().all(|c| c.passed);
    Ok(SpectrumReport {
        beta_d: b,
        plot_range: range,
        cases,
        passed,
    })
}

/// Writes eigenvalues, histograms, the semicircle density curve and a JSON
/// summary. Fails with the tolerance exit code when a KS threshold is missed.
pub fn run_spectrum(config: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let report = spectrum(config)?;
    let header = Header::new(config);
    let mut eig = Table::new(&["lambda", "trial", "case", "index", "eigenvalue"]);
    let mut hist = Table::new(&[
        "lambda", "trial", "case", "bin_lo", "bin_hi", "count", "density",
    ]);
    for c in &report.cases {
        for (i, &x) in c.eigenvalues.iter().enumerate() {
            eig.push(vec![
                fmt_f64(c.lambda),
                c.trial.to_string(),
                c.case.into(),
                i.to_string(),
                fmt_f64(x),
            ]);
        }
        let h = &c.histogram;
        for k in 0..h.counts.len() {
            hist.push(vec![
                fmt_f64(c.lambda),
                c.trial.to_string(),
                c.case.into(),
                fmt_f64(h.edges[k]),
                fmt_f64(h.edges[k + 1]),
                h.counts[k].to_string(),
                fmt_f64(h.density[k]),
            ]);
        }
    }
    let law = SemicircleLaw::new(config.d)?;
    let (lo, hi) = report.plot_range;
    let mut curve = Table::new(&["x", "density", "support_edge"]);
    for k in 0..DENSITY_SAMPLES {
        let x = lo + (hi - lo) * k as f64 / (DENSITY_SAMPLES - 1) as f64;
        curve.push(vec![
            fmt_f64(x),
            fmt_f64(law.density(x)),
            fmt_f64(law.beta()),
        ]);
    }
    let dir = &config.output_dir;
    prepare_dir(dir)?;
    let files = vec![
        write_csv(dir, "spectrum_eigenvalues.csv", &header, &eig)?,
        write_csv(dir, "spectrum_histogram.csv", &header, &hist)?,
        write_csv(dir, "spectrum_semicircle.csv", &header, &curve)?,
        write_json(dir, "spectrum_summary.json", &header, &report)?,
    ];
    let failures = report
        .cases
        .iter()
        .filter(|c| !c.passed)
        .map(|c| {
            format!(
                "lambda={} trial={} case={}: ks {:.4} >= {}",
                c.lambda, c.trial, c.case, c.ks, c.ks_threshold
            )
        })
        .collect();
    Ok(Outcome {
        passed: report.passed,
        files,
        failures,
    })
}
