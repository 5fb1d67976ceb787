//! Tensor eigenpairs of the observation: shifted power iteration, the
//! second-order local-maximum certificate and first-order sensitivities of an
//! eigenpair with respect to a noise entry.
//!
//! Objective values are reported as `Y·u^d`, without a `1/d` factor, so they
//! are directly comparable with spectral-norm predictions.

use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::{sample_unit_vector, SeedSpec};
use crate::error::{domain, Error, Result};
use crate::linalg::{cholesky_solve, dot, norm, normalized};
use crate::spectral::{eigh, eigvalsh};
use crate::tensor::{MultiIndex, SymmetricTensor, UNIT_NORM_TOL};

/// Slack allowed when certifying the local-maximum eigenvalue condition.
pub const LOCAL_MAX_SLACK: f64 = 1e-8;

/// Residual required before a local-maximum certificate is attempted.
pub const CERTIFY_RESIDUAL_TOL: f64 = 1e-6;

/// Residual required before eigenpair derivatives are evaluated.
pub const DERIVATIVE_RESIDUAL_TOL: f64 = 1e-8;

/// Minimum distance between `μ/(d-1)` and the contraction spectrum.
pub const RESOLVENT_SEPARATION: f64 = 1e-6;

fn check_unit(u: &[f64]) -> Result<()> {
    let r = norm(u);
    if (r - 1.0).abs() > UNIT_NORM_TOL {
        return domain(format!("vector must have unit norm, got ‖u‖ = {r:.15}"));
    }
    Ok(())
}

/// `Y·u^d` for a unit vector `u`.
pub fn objective(y: &SymmetricTensor, u: &[f64]) -> Result<f64> {
    check_unit(u)?;
    y.contract_to_scalar(u)
}

/// `‖Y·u^{d-1} - μu‖₂`.
pub fn eigenpair_residual(y: &SymmetricTensor, mu: f64, u: &[f64]) -> Result<f64> {
    check_unit(u)?;
    let g = y.contract_to_vector(u)?;
    Ok(residual_from_gradient(&g, mu, u))
}

fn residual_from_gradient(g: &[f64], mu: f64, u: &[f64]) -> f64 {
    g.iter()
        .zip(u)
        .map(|(gi, ui)| (gi - mu * ui).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// How the power-iteration shift is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Shift {
    /// `(d-1)` times the spectral radius of `Y·v0^{d-2}`, doubled whenever a
    /// step would decrease the objective.
    Auto,
    /// `(d-1)` times the largest absolute row sum of `Y·v0^{d-2}`, with the
    /// same doubling rule. Grows like `√N` for noise tensors.
    RowSumBound,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerOptions {
    pub shift: Shift,
    /// Stop once consecutive objective values differ by less than this.
    pub tol: f64,
    /// The eigen-residual must also fall below this before stopping.
    pub residual_tol: f64,
    pub max_iter: usize,
    /// When set, iterates whose residual is below this value try a
    /// safeguarded Newton step on the sphere before the next power step.
    pub newton_polish: Option<f64>,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            shift: Shift::Auto,
            tol: 1e-10,
            residual_tol: 1e-9,
            max_iter: 10_000,
            newton_polish: None,
        }
    }
}

impl PowerOptions {
    /// Defaults plus Newton polishing below residual `1e-2`, as used by the
    /// experiment harness.
    pub fn polished() -> Self {
        Self {
            newton_polish: Some(1e-2),
            ..Self::default()
        }
    }
}

/// Certificate of the second-order condition at an eigenpair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalMaxCertificate {
    pub is_local_max: bool,
    /// `μ/(d-1)` minus the largest eigenvalue of `Y·u^{d-2}` on `u⊥`.
    pub gap: f64,
    /// Largest eigenvalue of `Y·u^{d-2}` restricted to `u⊥`.
    pub second_eig: f64,
    /// Whether `u` spans the top eigenspace of `Y·u^{d-2}`.
    pub u_is_top: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenpairResult {
    pub mu: f64,
    pub u: Vec<f64>,
    pub residual: f64,
    /// `|⟨x, u⟩|` when the planted spike is known.
    pub alignment: Option<f64>,
    /// Sign of `⟨x, u⟩`, logged separately from the alignment.
    pub alignment_sign: Option<f64>,
    pub certificate: Option<LocalMaxCertificate>,
    pub iterations: usize,
    pub converged: bool,
    /// Final shift used by the iteration.
    pub shift: f64,
    /// `Y·v_k^d` for every accepted iterate, starting with `v0`.
    pub objective_trace: Vec<f64>,
}

impl EigenpairResult {
    pub fn is_local_max(&self) -> bool {
        self.certificate.is_some_and(|c| c.is_local_max)
    }

    pub fn gap(&self) -> Option<f64> {
        self.certificate.map(|c| c.gap)
    }

    /// Records `|⟨x, u⟩|` and its sign.
    pub fn with_spike(mut self, x: &[f64]) -> Self {
        let s = dot(x, &self.u);
        self.alignment = Some(s.abs());
        self.alignment_sign = Some(if s < 0.0 { -1.0 } else { 1.0 });
        self
    }
}

/// Initial shift for a start vector under the given rule.
pub fn initial_shift(y: &SymmetricTensor, v0: &[f64], rule: Shift) -> Result<f64> {
    let scale = (y.order() - 1) as f64;
    Ok(match rule {
        Shift::Fixed(s) => s,
        Shift::RowSumBound => scale * y.contract_to_matrix(v0)?.matrix.max_row_sum(),
        Shift::Auto => {
            let ev = eigvalsh(&y.contract_to_matrix(v0)?.matrix)?;
            scale * ev[0].abs().max(ev[ev.len() - 1].abs())
        }
    })
}

// Steps with an objective drop larger than this (relative) are rejected.
const DECREASE_SLACK: f64 = 1e-13;

// Newton step for the eigen-equations restricted to the sphere. Returns
// `None` unless the Hessian of the objective on v⊥ is negative definite.
fn newton_step(y: &SymmetricTensor, v: &[f64], g: &[f64], f: f64) -> Result<Option<Vec<f64>>> {
    let d = y.order() as f64;
    let c = y.contract_to_matrix(v)?;
    let kappa = (d - 1.0) * f.abs() + 1.0;
    // f·I - (d-1)·C on v⊥, with the v direction made positive.
    let m = c
        .matrix
        .scaled(-(d - 1.0))
        .shifted(f)
        .rank_one_update(kappa, v);
    let r: Vec<f64> = g.iter().zip(v).map(|(gi, vi)| gi - f * vi).collect();
    let Some(mut s) = cholesky_solve(&m, &r) else {
        return Ok(None);
    };
    let radial = dot(&s, v);
    for (si, vi) in s.iter_mut().zip(v) {
        *si -= radial * vi;
    }
    let w: Vec<f64> = v.iter().zip(&s).map(|(a, b)| a + b).collect();
    Ok(normalized(&w))
}

/// Per-iteration hook for [`power_iteration_with`]: iteration index, iterate
/// and objective value.
pub type IterateHook<'a> = &'a mut dyn FnMut(usize, &[f64], f64);

/// Shifted power iteration `v ← normalize(Y·v^{d-1} + shift·v)`.
///
/// The returned eigenpair carries its residual and, when the residual is small
/// enough, the local-maximum certificate.
pub fn power_iteration(
    y: &SymmetricTensor,
    v0: &[f64],
    opts: &PowerOptions,
) -> Result<EigenpairResult> {
    power_iteration_with(y, v0, opts, None)
}

pub fn power_iteration_with(
    y: &SymmetricTensor,
    v0: &[f64],
    opts: &PowerOptions,
    mut hook: Option<IterateHook<'_>>,
) -> Result<EigenpairResult> {
    check_unit(v0)?;
    if y.order() < 3 {
        return domain("power iteration needs a tensor of order >= 3");
    }
    if !(opts.tol > 0.0) {
        return domain(format!("tolerance must be positive, got {}", opts.tol));
    }
    let adaptive = !matches!(opts.shift, Shift::Fixed(_));
    let mut shift = initial_shift(y, v0, opts.shift)?;
    let mut newton_cooldown = 0usize;
    let mut v = v0.to_vec();
    let mut g = y.contract_to_vector(&v)?;
    let mut f = dot(&g, &v);
    let mut trace = vec![f];
    if let Some(h) = hook.as_mut() {
        h(0, &v, f);
    }
    let mut converged = false;
    let mut iterations = 0;
    let mut step = 0;
    while iterations < opts.max_iter && step < 4 * opts.max_iter {
        step += 1;
        if let Some(switch) = opts.newton_polish {
            if newton_cooldown == 0 && residual_from_gradient(&g, f, &v) < switch {
                let accepted = match newton_step(y, &v, &g, f)? {
                    Some(v_next) => {
                        let g_next = y.contract_to_vector(&v_next)?;
                        let f_next = dot(&g_next, &v_next);
                        let r_old = residual_from_gradient(&g, f, &v);
                        let r_new = residual_from_gradient(&g_next, f_next, &v_next);
                        if f_next >= f - DECREASE_SLACK * f.abs().max(1.0) && r_new < r_old {
                            Some((v_next, g_next, f_next))
                        } else {
                            None
                        }
                    }
                    None => None,
                };
                match accepted {
                    Some((v_next, g_next, f_next)) => {
                        iterations += 1;
                        let delta = (f_next - f).abs();
                        v = v_next;
                        g = g_next;
                        f = f_next;
                        trace.push(f);
                        if let Some(h) = hook.as_mut() {
                            h(iterations, &v, f);
                        }
                        if delta < opts.tol && residual_from_gradient(&g, f, &v) < opts.residual_tol
                        {
                            converged = true;
                            break;
                        }
                        continue;
                    }
                    None => newton_cooldown = 20,
                }
            }
            newton_cooldown = newton_cooldown.saturating_sub(1);
        }
        let w: Vec<f64> = g.iter().zip(&v).map(|(gi, vi)| gi + shift * vi).collect();
        let Some(v_next) = normalized(&w) else {
            return Err(Error::DegenerateIterate { step });
        };
        let g_next = y.contract_to_vector(&v_next)?;
        let f_next = dot(&g_next, &v_next);
        if adaptive && f_next < f - DECREASE_SLACK * f.abs().max(1.0) {
            // reject the step and retry with a larger shift
            shift = 2.0 * shift.max(1e-3);
            continue;
        }
        iterations += 1;
        let delta = (f_next - f).abs();
        v = v_next;
        g = g_next;
        f = f_next;
        trace.push(f);
        if let Some(h) = hook.as_mut() {
            h(iterations, &v, f);
        }
        if delta < opts.tol && residual_from_gradient(&g, f, &v) < opts.residual_tol {
            converged = true;
            break;
        }
    }
    let residual = residual_from_gradient(&g, f, &v);
    let certificate = if residual < CERTIFY_RESIDUAL_TOL {
        Some(local_max_check(y, f, &v)?)
    } else {
        None
    };
    Ok(EigenpairResult {
        mu: f,
        u: v,
        residual,
        alignment: None,
        alignment_sign: None,
        certificate,
        iterations,
        converged,
        shift,
        objective_trace: trace,
    })
}

/// Checks that all eigenvalues of `Y·u^{d-2}` on `u⊥` are at most `μ/(d-1)`.
///
/// The spectrum on `u⊥` is obtained by pushing the `u` direction far below
/// the rest of the spectrum with a rank-one update.
pub fn local_max_check(y: &SymmetricTensor, mu: f64, u: &[f64]) -> Result<LocalMaxCertificate> {
    let r = eigenpair_residual(y, mu, u)?;
    if !(r < CERTIFY_RESIDUAL_TOL) {
        return domain(format!(
            "eigenpair residual {r:e} exceeds {CERTIFY_RESIDUAL_TOL:e}; not a critical point"
        ));
    }
    let d = y.order();
    let c = y.contract_to_matrix(u)?;
    let push = mu.abs() + c.matrix.frobenius_norm() + 1.0;
    let deflated = c.matrix.rank_one_update(-(mu + push), u);
    let perp = eigvalsh(&deflated)?;
    let second = *perp.last().expect("non-empty spectrum");
    let threshold = mu / (d - 1) as f64;
    let u_is_top = second <= mu + LOCAL_MAX_SLACK * mu.abs().max(1.0);
    let gap = threshold - second;
    Ok(LocalMaxCertificate {
        is_local_max: u_is_top && gap >= -LOCAL_MAX_SLACK,
        gap,
        second_eig: second,
        u_is_top,
    })
}

/// Best objective over `restarts` power iterations from uniform start vectors.
///
/// Start vector `k` is drawn from `seed.child(k)`. Converged runs are
/// preferred over non-converged ones.
pub fn best_of_restarts(
    y: &SymmetricTensor,
    restarts: usize,
    seed: SeedSpec,
    opts: &PowerOptions,
) -> Result<EigenpairResult> {
    if restarts == 0 {
        return domain("at least one restart is required");
    }
    let runs: Vec<EigenpairResult> = (0..restarts as u64)
        .into_par_iter()
        .map(|k| {
            let v0 = sample_unit_vector(y.dim(), seed.child(k))?;
            power_iteration(y, &v0, opts)
        })
        .collect::<Result<_>>()?;
    Ok(runs
        .into_iter()
        .reduce(|best, r| {
            let better = match (r.converged, best.converged) {
                (true, false) => true,
                (false, true) => false,
                _ => r.mu > best.mu,
            };
            if better {
                r
            } else {
                best
            }
        })
        .expect("non-empty"))
}

/// `φ` with `σ²·φ = (1/d) Σ_j (∏_{k≠j} u_{i_k}) e^{(i_j)}`, where `σ²` is
/// the variance `1/multiplicity` of the noise entry at `idx`.
pub fn phi_vector(u: &[f64], idx: &MultiIndex) -> Result<Vec<f64>> {
    check_unit(u)?;
    let ids = idx.indices();
    if let Some(&bad) = ids.iter().find(|&&i| i >= u.len()) {
        return domain(format!(
            "index {bad} out of range for dimension {}",
            u.len()
        ));
    }
    let d = ids.len();
    let scale = idx.multiplicity() as f64 / d as f64;
    let mut phi = vec![0.0; u.len()];
    for j in 0..d {
        let others: f64 = ids
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j)
            .map(|(_, &i)| u[i])
            .product();
        phi[ids[j]] += scale * others;
    }
    Ok(phi)
}

/// Sensitivity of an eigenpair to one noise entry (the whole permutation orbit).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativePair {
    pub du: Vec<f64>,
    pub dmu: f64,
    #[serde(serialize_with = "serialize_index")]
    pub at: MultiIndex,
}

fn serialize_index<S: serde::Serializer>(
    idx: &MultiIndex,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    idx.indices().serialize(s)
}

impl DerivativePair {
    /// `(du, dmu)` stacked into one vector of length `N + 1`.
    pub fn stacked(&self) -> Vec<f64> {
        let mut v = self.du.clone();
        v.push(self.dmu);
        v
    }

    /// `‖self - reference‖ / ‖reference‖` over the stacked vectors.
    pub fn relative_error(&self, reference: &DerivativePair) -> f64 {
        let a = self.stacked();
        let b = reference.stacked();
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        norm(&diff) / norm(&b)
    }
}

/// Closed-form derivative of `(u, μ)` with respect to the noise entry at
/// `idx`, for `Y = λ x^{⊗d} + W/√N`.
///
/// `dμ = ∏u_{i_j} / (σ²√N)` and
/// `du = -R̄φ / ((d-1)√N) + dμ·u / ((d-2)μ)` with `R̄ = (Y·u^{d-2} - μ/(d-1))^{-1}`.
pub fn eigenpair_derivative(
    y: &SymmetricTensor,
    mu: f64,
    u: &[f64],
    idx: &MultiIndex,
) -> Result<DerivativePair> {
    let d = y.order();
    if d < 3 {
        return domain("eigenpair derivatives need order >= 3");
    }
    if idx.order() != d {
        return domain(format!(
            "index of order {} for a tensor of order {d}",
            idx.order()
        ));
    }
    let r = eigenpair_residual(y, mu, u)?;
    if !(r < DERIVATIVE_RESIDUAL_TOL) {
        return domain(format!(
            "eigenpair residual {r:e} exceeds {DERIVATIVE_RESIDUAL_TOL:e}"
        ));
    }
    if mu == 0.0 {
        return domain("eigenvalue is zero; derivative formula divides by μ");
    }
    let sqrt_n = (y.dim() as f64).sqrt();
    let pole = mu / (d - 1) as f64;
    let c = y.contract_to_matrix(u)?;
    let eig = eigh(&c.matrix)?;
    if let Some(&closest) = eig
        .values
        .iter()
        .min_by(|a, b| (*a - pole).abs().total_cmp(&(*b - pole).abs()))
    {
        if (closest - pole).abs() <= RESOLVENT_SEPARATION {
            return Err(Error::Singular(format!(
                "μ/(d-1) = {pole} is within {RESOLVENT_SEPARATION:e} of eigenvalue {closest}"
            )));
        }
    }
    let phi = phi_vector(u, idx)?;
    let mut r_phi = vec![0.0; u.len()];
    for (lam, vec) in eig.values.iter().zip(&eig.vectors) {
        let coef = dot(vec, &phi) / (lam - pole);
        for (acc, vi) in r_phi.iter_mut().zip(vec) {
            *acc += coef * vi;
        }
    }
    let prod: f64 = idx.indices().iter().map(|&i| u[i]).product();
    let dmu = idx.multiplicity() as f64 * prod / sqrt_n;
    let radial = dmu / ((d - 2) as f64 * mu);
    let du = r_phi
        .iter()
        .zip(u)
        .map(|(rp, ui)| -rp / ((d - 1) as f64 * sqrt_n) + radial * ui)
        .collect();
    Ok(DerivativePair {
        du,
        dmu,
        at: idx.clone(),
    })
}

/// Options for re-solving perturbed eigenpairs in finite differences.
pub fn resolve_options() -> PowerOptions {
    PowerOptions {
        shift: Shift::Fixed(0.0),
        tol: 1e-15,
        residual_tol: 1e-13,
        max_iter: 20_000,
        newton_polish: Some(1e-2),
    }
}

/// Central finite difference of the eigenpair at `(mu, u)` with respect to
/// the noise entry at `idx`.
///
/// The noise orbit is perturbed by `±h`, i.e. the observation entry by
/// `±h/√N`, and each perturbed eigenpair is re-solved by power iteration
/// warm-started at `u`.
pub fn finite_difference_derivative(
    y: &SymmetricTensor,
    u: &[f64],
    idx: &MultiIndex,
    h: f64,
) -> Result<DerivativePair> {
    let opts = resolve_options();
    let step = h / (y.dim() as f64).sqrt();
    let solve = |sign: f64| -> Result<EigenpairResult> {
        let mut yp = y.clone();
        yp.add_to(idx.indices(), sign * step)?;
        let r = power_iteration(&yp, u, &opts)?;
        if !r.converged {
            return Err(Error::Numerical(format!(
                "perturbed eigenpair at {:?} did not converge (residual {:e})",
                idx.indices(),
                r.residual
            )));
        }
        Ok(r)
    };
    let plus = solve(1.0)?;
    let minus = solve(-1.0)?;
    let du = plus
        .u
        .iter()
        .zip(&minus.u)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect();
    Ok(DerivativePair {
        du,
        dmu: (plus.mu - minus.mu) / (2.0 * h),
        at: idx.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::rank_one;

    fn unit(v: &[f64]) -> Vec<f64> {
        normalized(v).unwrap()
    }

    #[test]
    fn objective_of_rank_one() {
        let x = unit(&[1.0, 2.0, -1.0, 0.5]);
        let y = rank_one(2.5, &x, 3).unwrap();
        assert!((objective(&y, &x).unwrap() - 2.5).abs() < 1e-14);
        let perp = unit(&[2.0, -1.0, 0.0, 0.0]);
        assert!(objective(&y, &perp).unwrap().abs() < 1e-15);
        assert!(objective(&y, &[1.0, 1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn toy_objective() {
        let y = SymmetricTensor::from_canonical(3, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(objective(&y, &[1.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn residuals_of_exact_pairs() {
        let x = unit(&[0.3, -0.2, 0.9]);
        let y = rank_one(3.0, &x, 3).unwrap();
        assert!(eigenpair_residual(&y, 3.0, &x).unwrap() < 1e-12);
        assert!((eigenpair_residual(&y, 3.1, &x).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_recovers_rank_one_spike() {
        let x = unit(&[0.5, 0.5, -0.5, 0.5, 0.1]);
        let y = rank_one(2.0, &x, 3).unwrap();
        let v0 = unit(&[1.0, 0.2, -0.1, 0.3, 0.0]);
        let r = power_iteration(&y, &v0, &PowerOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.mu - 2.0).abs() < 1e-10);
        assert!(r.residual < 1e-8);
        assert!(r.is_local_max());
        let r = r.with_spike(&x);
        assert!((r.alignment.unwrap() - 1.0).abs() < 1e-10);
        assert!(r.objective_trace.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn zero_tensor_is_degenerate_without_shift() {
        let y = SymmetricTensor::zeros(3, 3).unwrap();
        let opts = PowerOptions {
            shift: Shift::Fixed(0.0),
            ..PowerOptions::default()
        };
        let err = power_iteration(&y, &[1.0, 0.0, 0.0], &opts).unwrap_err();
        assert!(matches!(err, Error::DegenerateIterate { step: 1 }));
    }

    #[test]
    fn max_iter_exhaustion_is_flagged() {
        let x = unit(&[1.0, 1.0, 1.0]);
        let y = rank_one(1.0, &x, 3).unwrap();
        let opts = PowerOptions {
            max_iter: 1,
            ..PowerOptions::default()
        };
        let r = power_iteration(&y, &unit(&[1.0, 0.0, 0.1]), &opts).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn rank_one_certificate() {
        let x = unit(&[0.2, 0.4, 0.4, -0.8]);
        let y = rank_one(3.0, &x, 3).unwrap();
        let c = local_max_check(&y, 3.0, &x).unwrap();
        assert!(c.is_local_max && c.u_is_top);
        assert!(c.second_eig.abs() < 1e-12);
        assert!((c.gap - 1.5).abs() < 1e-12);
        assert!(local_max_check(&y, 2.0, &x).is_err());
    }

    #[test]
    fn saddle_is_not_certified() {
        let e1 = [1.0, 0.0, 0.0];
        let mut y = rank_one(1.0, &e1, 3).unwrap();
        // Y_{1,2,2} = c makes (Y·e1)_{22} = c while keeping Y·e1² = e1.
        y.set(&[0, 1, 1], 0.9).unwrap();
        let c = local_max_check(&y, 1.0, &e1).unwrap();
        assert!(!c.is_local_max);
        assert!(c.gap < 0.0);
        assert!((c.second_eig - 0.9).abs() < 1e-12);
    }

    #[test]
    fn phi_examples() {
        let u = unit(&[0.3, 0.5, -0.2, 0.7]);
        let idx = MultiIndex::new(&[0, 0, 0], 4).unwrap();
        let phi = phi_vector(&u, &idx).unwrap();
        assert!((phi[0] - u[0] * u[0]).abs() < 1e-15);
        assert!(phi[1..].iter().all(|&p| p == 0.0));

        let idx = MultiIndex::new(&[2, 0, 1], 4).unwrap();
        let phi = phi_vector(&u, &idx).unwrap();
        let expect = [2.0 * u[1] * u[2], 2.0 * u[0] * u[2], 2.0 * u[0] * u[1], 0.0];
        for (a, b) in phi.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }

        let idx = MultiIndex::new(&[3, 1, 3, 3], 4).unwrap();
        let phi = phi_vector(&u, &idx).unwrap();
        assert!(phi.iter().filter(|p| **p != 0.0).count() <= idx.distinct());
    }
}
