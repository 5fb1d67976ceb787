use serde::Serialize;

use super::output::{fmt_f64, fmt_opt, prepare_dir, write_csv, write_json, Header, Table};
use super::{expect_command, Command, ExperimentConfig, ExperimentError, Outcome};
use crate::asymptotics::{
    alpha3_closed, lambda_c, lambda_s, mu3_closed, mu4_explicit, mu_0, mu_star_closed, q_closed,
    solve_fixed_point, stationarity_residual, z1_star, CriticalThreshold, NoiseSpectralNorm,
};
use crate::spectral::beta;

/// `|solver - closed form|` bound for `d = 3`.
pub const CUBIC_MATCH_TOL: f64 = 1e-8;
/// `|closed form - z_1^*|` bound.
pub const QUARTIC_ROOT_TOL: f64 = 1e-12;
/// `|solver - closed form|` bound for `d = 4, 5`.
pub const HIGHER_ORDER_MATCH_TOL: f64 = 1e-6;
pub const STATIONARITY_TOL: f64 = 1e-10;
pub const EXPLICIT_MU4_TOL: f64 = 1e-10;
pub const THRESHOLD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointRow {
    pub d: usize,
    pub lambda: f64,
    pub mu_solver: Option<f64>,
    pub alpha_solver: Option<f64>,
    pub solver_residual: Option<f64>,
    pub roots: Vec<f64>,
    pub mu_closed: Option<f64>,
    /// `√q_d(λ)`.
    pub alpha_closed: Option<f64>,
    pub q_closed: Option<f64>,
    pub z1_star: Option<f64>,
    pub mu4_explicit: Option<f64>,
    pub mu_error: Option<f64>,
    /// `|α - √q|` for `d = 3`, `|α² - q|` otherwise.
    pub alpha_error: Option<f64>,
    pub z1_error: Option<f64>,
    pub mu4_explicit_error: Option<f64>,
    pub stationarity_residual: Option<f64>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub d: usize,
    pub beta_d: f64,
    pub local_max_floor: f64,
    pub lambda_s: f64,
    pub lambda_c: CriticalThreshold,
    pub mu_0: NoiseSpectralNorm,
    pub thresholds_ordered: bool,
    pub max_mu_error: f64,
    pub max_alpha_error: f64,
    pub rows: Vec<FixedPointRow>,
    pub failures: Vec<String>,
    pub passed: bool,
}

fn check(failures: &mut Vec<String>, what: &str, value: Option<f64>, bound: f64) {
    if let Some(v) = value {
        if !(v <= bound) {
            failures.push(format!("{what} = {v:e} exceeds {bound:e}"));
        }
    }
}

fn row(lambda: f64, d: usize, tol: f64) -> crate::Result<FixedPointRow> {
    let fp = solve_fixed_point(lambda, d, tol)?;
    let closed = (3..=5).contains(&d) && lambda >= lambda_s(d);
    let q = if closed {
        Some(q_closed(lambda, d)?)
    } else {
        None
    };
    let mu_c = if closed {
        Some(mu_star_closed(lambda, d)?)
    } else {
        None
    };
    let (z1, alpha_c, mu4) = match (closed, d) {
        (true, 3) => (Some(z1_star(lambda)?), Some(alpha3_closed(lambda)?), None),
        (true, 4) => (None, q.map(f64::sqrt), Some(mu4_explicit(lambda)?)),
        _ => (None, q.map(f64::sqrt), None),
    };
    let mu_c = if d == 3 && closed {
        Some(mu3_closed(lambda)?)
    } else {
        mu_c
    };
    let mu_solver = fp.as_ref().map(|f| f.mu);
    let alpha_solver = fp.as_ref().map(|f| f.alpha);
    let diff = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(a, b)| (a - b).abs());
    let alpha_error = if d == 3 {
        diff(alpha_solver, alpha_c)
    } else {
        diff(alpha_solver.map(|a| a * a), q)
    };
    let mut r = FixedPointRow {
        d,
        lambda,
        mu_solver,
        alpha_solver,
        solver_residual: fp.as_ref().map(|f| f.residual),
        roots: fp.map(|f| f.roots).unwrap_or_default(),
        mu_closed: mu_c,
        alpha_closed: alpha_c,
        q_closed: q,
        z1_star: z1,
        mu4_explicit: mu4,
        mu_error: diff(mu_solver, mu_c),
        alpha_error,
        z1_error: diff(mu_c, z1),
        mu4_explicit_error: diff(mu4, mu_c),
        stationarity_residual: q.map(|q| stationarity_residual(lambda, q, d).abs()),
        failures: Vec::new(),
    };
    let match_tol = if d == 3 {
        CUBIC_MATCH_TOL
    } else {
        HIGHER_ORDER_MATCH_TOL
    };
    let mut f = Vec::new();
    if closed && r.mu_solver.is_none() {
        f.push("no fixed point found above λ_s".to_string());
    }
    check(&mut f, "solver residual", r.solver_residual, tol);
    check(&mut f, "|mu - closed form|", r.mu_error, match_tol);
    check(&mut f, "alpha error", r.alpha_error, match_tol);
    check(&mut f, "|closed form - z1*|", r.z1_error, QUARTIC_ROOT_TOL);
    check(
        &mut f,
        "|explicit mu4 - general form|",
        r.mu4_explicit_error,
        EXPLICIT_MU4_TOL,
    );
    check(
        &mut f,
        "stationarity residual",
        r.stationarity_residual,
        STATIONARITY_TOL,
    );
    r.failures = f;
    Ok(r)
}

/// Fixed-point solutions against the closed forms over the lambda grid,
/// with the thresholds of the configured order.
pub fn fixed_point_report(config: &ExperimentConfig) -> Result<FixedPointReport, ExperimentError> {
    expect_command(config, Command::FixedPoint)?;
    let d = config.d;
    let rows: Vec<FixedPointRow> = config
        .lambdas
        .iter()
        .map(|&l| row(l, d, config.tol))
        .collect::<crate::Result<_>>()?;
    let lc = lambda_c(d, THRESHOLD_TOL)?;
    let m0 = mu_0(d, THRESHOLD_TOL)?;
    let ls = lambda_s(d);
    let ordered = ls < lc.lambda_c && lc.lambda_c < m0.mu_0;
    let mut failures: Vec<String> = rows
        .iter()
        .flat_map(|r| {
            r.failures
                .iter()
                .map(move |f| format!("d={} lambda={}: {f}", r.d, r.lambda))
        })
        .collect();
    if !ordered {
        failures.push(format!(
            "threshold ordering violated: λ_s = {ls}, λ_c = {}, μ_0 = {}",
            lc.lambda_c, m0.mu_0
        ));
    }
    let max_of =
        |f: fn(&FixedPointRow) -> Option<f64>| rows.iter().filter_map(f).fold(0.0, f64::max);
    Ok(FixedPointReport {
        d,
        beta_d: beta(d),
        local_max_floor: (d - 1) as f64 * beta(d),
        lambda_s: ls,
        lambda_c: lc,
        mu_0: m0,
        thresholds_ordered: ordered,
        max_mu_error: max_of(|r| r.mu_error),
        max_alpha_error: max_of(|r| r.alpha_error),
        passed: failures.is_empty(),
        failures,
        rows,
    })
}

/// Writes `fixed_point.csv` and `fixed_point.json`; tolerance failures list
/// the offending rows.
pub fn run_fixed_point(config: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let report = fixed_point_report(config)?;
    let header = Header::new(config);
    let mut t = Table::new(&[
        "d",
        "lambda",
        "mu_solver",
        "alpha_solver",
        "solver_residual",
        "roots_found",
        "mu_closed",
        "alpha_closed",
        "q_closed",
        "z1_star",
        "mu_error",
        "alpha_error",
        "z1_error",
        "stationarity_residual",
    ]);
    for r in &report.rows {
        t.push(vec![
            r.d.to_string(),
            fmt_f64(r.lambda),
            fmt_opt(r.mu_solver),
            fmt_opt(r.alpha_solver),
            fmt_opt(r.solver_residual),
            r.roots.len().to_string(),
            fmt_opt(r.mu_closed),
            fmt_opt(r.alpha_closed),
            fmt_opt(r.q_closed),
            fmt_opt(r.z1_star),
            fmt_opt(r.mu_error),
            fmt_opt(r.alpha_error),
            fmt_opt(r.z1_error),
            fmt_opt(r.stationarity_residual),
        ]);
    }
    let dir = &config.output_dir;
    prepare_dir(dir)?;
    let files = vec![
        write_csv(dir, "fixed_point.csv", &header, &t)?,
        write_json(dir, "fixed_point.json", &header, &report)?,
    ];
    Ok(Outcome {
        passed: report.passed,
        files,
        failures: report.failures.clone(),
    })
}
