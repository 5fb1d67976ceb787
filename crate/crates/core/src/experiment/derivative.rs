use rand::seq::index::sample;
use rayon::prelude::*;
use serde::Serialize;

use super::output::{fmt_opt, prepare_dir, write_csv, write_json, Header, Table};
use super::{
    expect_command, task_seed, Command, ExperimentConfig, ExperimentError, Outcome, INDEX_TAG,
    MODEL_TAG, RESTART_TAG,
};
use crate::ensemble::{sample_spiked_model, SeedSpec};
use crate::landscape::{
    best_of_restarts, eigenpair_derivative, finite_difference_derivative, DerivativePair,
    PowerOptions,
};
use crate::tensor::{MultiIndex, SymmetricTensor};
use crate::Result;

/// Finite-difference step for the accuracy check.
pub const FD_STEP: f64 = 1e-6;
/// Bound on the relative error at [`FD_STEP`].
pub const FD_REL_TOL: f64 = 1e-4;
/// Step pair in the truncation-dominated regime used for the order check.
pub const ORDER_STEPS: (f64, f64) = (3e-2, 3e-3);
/// Accepted range of `err(h) / err(h/10)` for a second-order scheme.
pub const ORDER_RATIO_RANGE: (f64, f64) = (50.0, 200.0);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeRow {
    pub index: Vec<usize>,
    pub multiplicity: u64,
    pub dmu_exact: Option<f64>,
    pub dmu_fd: Option<f64>,
    /// Relative error at `h = 1e-6`.
    pub rel_error: Option<f64>,
    pub rel_error_h1e5: Option<f64>,
    /// `err(1e-5) / err(1e-6)`; dominated by re-solve rounding, reported only.
    pub small_step_ratio: Option<f64>,
    /// `err(3e-2) / err(3e-3)`.
    pub order_ratio: Option<f64>,
    pub flagged: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeCheckReport {
    pub lambda: f64,
    pub mu: f64,
    pub residual: f64,
    pub alignment: f64,
    pub multiplicity_classes: Vec<u64>,
    pub max_rel_error: f64,
    pub rows: Vec<DerivativeRow>,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// Integer partitions of `d` in decreasing lexicographic order; each one is
/// the pattern of repeated entries of a multiplicity class.
pub fn partitions(d: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            cur.push(p);
            go(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(d, d, &mut Vec::new(), &mut out);
    out
}

/// `count` multi-indices cycling through every repetition pattern of order
/// `d`, with distinct values drawn uniformly from `0..n`.
pub fn sample_indices(d: usize, n: usize, count: usize, seed: SeedSpec) -> Result<Vec<MultiIndex>> {
    let patterns = partitions(d);
    (0..count)
        .map(|k| {
            let parts = &patterns[k % patterns.len()];
            let mut rng = seed.child(k as u64).rng();
            let values = sample(&mut rng, n, parts.len()).into_vec();
            let raw: Vec<usize> = parts
                .iter()
                .zip(values)
                .flat_map(|(&p, v)| std::iter::repeat_n(v, p))
                .collect();
            MultiIndex::new(&raw, n)
        })
        .collect()
}

fn rel(
    exact: &DerivativePair,
    y: &SymmetricTensor,
    u: &[f64],
    idx: &MultiIndex,
    h: f64,
) -> Result<f64> {
    Ok(exact.relative_error(&finite_difference_derivative(y, u, idx, h)?))
}

fn check_index(y: &SymmetricTensor, mu: f64, u: &[f64], idx: &MultiIndex) -> DerivativeRow {
    let mut row = DerivativeRow {
        index: idx.indices().to_vec(),
        multiplicity: idx.multiplicity(),
        dmu_exact: None,
        dmu_fd: None,
        rel_error: None,
        rel_error_h1e5: None,
        small_step_ratio: None,
        order_ratio: None,
        flagged: None,
    };
    let run = |row: &mut DerivativeRow| -> Result<()> {
        let exact = eigenpair_derivative(y, mu, u, idx)?;
        row.dmu_exact = Some(exact.dmu);
        let fd = finite_difference_derivative(y, u, idx, FD_STEP)?;
        row.dmu_fd = Some(fd.dmu);
        let e6 = exact.relative_error(&fd);
        row.rel_error = Some(e6);
        let e5 = rel(&exact, y, u, idx, 1e-5)?;
        row.rel_error_h1e5 = Some(e5);
        row.small_step_ratio = Some(e5 / e6);
        let coarse = rel(&exact, y, u, idx, ORDER_STEPS.0)?;
        let fine = rel(&exact, y, u, idx, ORDER_STEPS.1)?;
        row.order_ratio = Some(coarse / fine);
        Ok(())
    };
    if let Err(e) = run(&mut row) {
        row.flagged = Some(e.to_string());
    }
    row
}

/// Analytic eigenpair derivatives against central finite differences at the
/// best critical point of one spiked tensor.
pub fn derivative_check(
    config: &ExperimentConfig,
) -> std::result::Result<DerivativeCheckReport, ExperimentError> {
    expect_command(config, Command::DerivativeCheck)?;
    let lambda = config.lambdas[0];
    let seed = task_seed(config.seed, 0, 0);
    let model = sample_spiked_model(lambda, config.d, config.n, seed.child(MODEL_TAG), None)?;
    let y = model.observation();
    let opts = PowerOptions {
        tol: config.tol,
        ..PowerOptions::polished()
    };
    let best = best_of_restarts(y, config.restarts, seed.child(RESTART_TAG), &opts)?
        .with_spike(model.spike());
    let indices = sample_indices(config.d, config.n, config.trials, seed.child(INDEX_TAG))?;
    let rows: Vec<DerivativeRow> = indices
        .par_iter()
        .map(|idx| check_index(y, best.mu, &best.u, idx))
        .collect();
    let mut classes: Vec<u64> = indices.iter().map(|i| i.multiplicity()).collect();
    classes.sort_unstable();
    classes.dedup();
    let mut failures = Vec::new();
    let ok: Vec<&DerivativeRow> = rows.iter().filter(|r| r.flagged.is_none()).collect();
    if ok.is_empty() {
        failures.push("every index was flagged".to_string());
    }
    let max_rel_error = ok.iter().filter_map(|r| r.rel_error).fold(0.0, f64::max);
    for r in &ok {
        let e = r.rel_error.expect("unflagged rows are complete");
        if !(e < FD_REL_TOL) {
            failures.push(format!(
                "{:?}: relative error {e:e} >= {FD_REL_TOL:e}",
                r.index
            ));
        }
        let q = r.order_ratio.expect("unflagged rows are complete");
        if !(q >= ORDER_RATIO_RANGE.0 && q <= ORDER_RATIO_RANGE.1) {
            failures.push(format!(
                "{:?}: order ratio {q:.1} outside {ORDER_RATIO_RANGE:?}",
                r.index
            ));
        }
    }
    Ok(DerivativeCheckReport {
        lambda,
        mu: best.mu,
        residual: best.residual,
        alignment: best.alignment.expect("spike is known"),
        multiplicity_classes: classes,
        max_rel_error,
        passed: failures.is_empty(),
        failures,
        rows,
    })
}

/// Writes `derivative_check.csv` and `derivative_check.json`.
pub fn run_derivative_check(
    config: &ExperimentConfig,
) -> std::result::Result<Outcome, ExperimentError> {
    let report = derivative_check(config)?;
    let header = Header::new(config);
    let mut t = Table::new(&[
        "index",
        "multiplicity",
        "dmu_exact",
        "dmu_fd",
        "rel_error",
        "rel_error_h1e5",
        "small_step_ratio",
        "order_ratio",
        "flagged",
    ]);
    for r in &report.rows {
        let index: Vec<String> = r.index.iter().map(|i| i.to_string()).collect();
        t.push(vec![
            index.join(" "),
            r.multiplicity.to_string(),
            fmt_opt(r.dmu_exact),
            fmt_opt(r.dmu_fd),
            fmt_opt(r.rel_error),
            fmt_opt(r.rel_error_h1e5),
            fmt_opt(r.small_step_ratio),
            fmt_opt(r.order_ratio),
            r.flagged.clone().unwrap_or_default(),
        ]);
    }
    let dir = &config.output_dir;
    prepare_dir(dir)?;
    let files = vec![
        write_csv(dir, "derivative_check.csv", &header, &t)?,
        write_json(dir, "derivative_check.json", &header, &report)?,
    ];
    Ok(Outcome {
        passed: report.passed,
        files,
        failures: report.failures.clone(),
    })
}
