//! Deterministic large-`N` predictions for the spiked model: the
//! fixed-point equation for the eigenvalue and alignment of the dominant
//! critical point, closed forms for `d = 3, 4, 5`, and the thresholds
//! `λ_s(d)`, `λ_c(d)` and `μ_0(d)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::roots::{brent, golden_max, newton_bracketed};
use crate::spectral::{beta, semicircle_stieltjes_real};

/// Slack below `λ_s(d)` still accepted by the closed forms.
pub const EDGE_SLACK: f64 = 1e-12;

/// Number of grid cells scanned for sign changes of the fixed-point map.
pub const FIXED_POINT_GRID: usize = 2000;

/// Distance of the upper end of the `t` interval from 1 in the variational
/// problem defining `λ_c`.
pub const VARIATIONAL_EDGE: f64 = 1e-9;

fn check_order(d: usize) -> Result<()> {
    if d < 3 {
        return domain(format!("tensor order must be at least 3, got {d}"));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return domain(format!("signal strength must be positive, got {lambda}"));
    }
    Ok(())
}

/// `[(z + m_d(z/(d-1))/d) / λ]^{1/(d-2)}`, real branch.
pub fn omega_d(z: f64, lambda: f64, d: usize) -> Result<f64> {
    check_order(d)?;
    check_lambda(lambda)?;
    let m = semicircle_stieltjes_real(z / (d - 1) as f64, d)?;
    let r = (z + m / d as f64) / lambda;
    let k = d - 2;
    if k == 1 {
        return Ok(r);
    }
    if r < 0.0 {
        if k.is_multiple_of(2) {
            return domain(format!(
                "negative radicand {r} under an even root (d = {d}, z = {z})"
            ));
        }
        return Ok(-(-r).powf(1.0 / k as f64));
    }
    Ok(r.powf(1.0 / k as f64))
}

/// `λ ω_d(z, λ)^d - m_d(z/(d-1)) / (d-1)`.
pub fn phi_d(z: f64, lambda: f64, d: usize) -> Result<f64> {
    let w = omega_d(z, lambda, d)?;
    let m = semicircle_stieltjes_real(z / (d - 1) as f64, d)?;
    Ok(lambda * w.powi(d as i32) - m / (d - 1) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPoint {
    /// Largest root of `z = φ_d(z, λ)`.
    pub mu: f64,
    pub alpha: f64,
    /// `|mu - φ_d(mu, λ)|`.
    pub residual: f64,
    /// Every root found on the bracket, ascending.
    pub roots: Vec<f64>,
}

/// Solves `z = φ_d(z, λ)` on `[(d-1)β_d, λ + 2]`.
///
/// The bracket is scanned on a uniform grid and every sign change refined by
/// Brent's method. Returns `None` when no root exists.
pub fn solve_fixed_point(lambda: f64, d: usize, tol: f64) -> Result<Option<FixedPoint>> {
    check_order(d)?;
    check_lambda(lambda)?;
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    let lo = (d - 1) as f64 * beta(d);
    let hi = lambda + 2.0;
    let g = |z: f64| phi_d(z, lambda, d).ok().map(|p| z - p);
    let mut roots = Vec::new();
    if g(lo).is_some_and(|v| v.abs() <= tol) {
        roots.push(lo);
    }
    let step = (hi - lo) / FIXED_POINT_GRID as f64;
    let mut prev = (lo, g(lo));
    for i in 1..=FIXED_POINT_GRID {
        let z = if i == FIXED_POINT_GRID {
            hi
        } else {
            lo + step * i as f64
        };
        let cur = (z, g(z));
        if let (Some(a), Some(b)) = (prev.1, cur.1) {
            if b == 0.0 {
                roots.push(z);
            } else if a != 0.0 && a.signum() != b.signum() {
                let r = brent(|x| g(x).unwrap_or(f64::NAN), prev.0, z, 1e-15)?;
                roots.push(r);
            }
        }
        prev = cur;
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let Some(&mu) = roots.last() else {
        return Ok(None);
    };
    let residual = g(mu)
        .ok_or_else(|| Error::Numerical(format!("fixed-point map undefined at root {mu}")))?
        .abs();
    Ok(Some(FixedPoint {
        mu,
        alpha: omega_d(mu, lambda, d)?,
        residual,
        roots,
    }))
}

/// `λ_s(d) = √((d-1)^{d-1} / (d (d-2)^{d-2}))`.
pub fn lambda_s(d: usize) -> f64 {
    let d = d as f64;
    ((d - 1.0).powf(d - 1.0) / (d * (d - 2.0).powf(d - 2.0))).sqrt()
}

fn check_closed_form(lambda: f64, d: usize) -> Result<()> {
    if !(3..=5).contains(&d) {
        return domain(format!("closed forms exist for d = 3, 4, 5 only, got {d}"));
    }
    let edge = lambda_s(d);
    if !(lambda >= edge - EDGE_SLACK) {
        return domain(format!(
            "closed form for d = {d} needs λ >= λ_s = {edge}, got {lambda}"
        ));
    }
    Ok(())
}

/// Eigenvalue of the dominant critical point for `d = 3`.
pub fn mu3_closed(lambda: f64) -> Result<f64> {
    check_closed_form(lambda, 3)?;
    let s = (9.0 * lambda * lambda - 12.0).max(0.0).sqrt();
    Ok((3.0 * lambda * lambda + lambda * s + 4.0)
        / (18.0 * lambda * lambda + 6.0 * lambda * s).sqrt())
}

/// Alignment of the dominant critical point for `d = 3`.
pub fn alpha3_closed(lambda: f64) -> Result<f64> {
    Ok(q_closed(lambda, 3)?.sqrt())
}

fn g4(lambda: f64) -> Complex64 {
    let l2 = lambda * lambda;
    let root = Complex64::new(81.0 - 48.0 * l2, 0.0).sqrt();
    ((8.0 * l2 + 3.0 * root - 27.0) / l2).cbrt()
}

fn q4_from(h: Complex64) -> f64 {
    (1.0 / 3.0 + h / 6.0 + 2.0 / (3.0 * h)).re
}

/// Squared alignment `q_d(λ)` from the closed forms for `d = 3, 4, 5`.
pub fn q_closed(lambda: f64, d: usize) -> Result<f64> {
    check_closed_form(lambda, d)?;
    let l = lambda;
    Ok(match d {
        3 => 0.5 + ((3.0 * l * l - 4.0).max(0.0) / (12.0 * l * l)).sqrt(),
        4 => q4_from(g4(l)),
        _ => {
            let s15 = 15f64.sqrt();
            let g = 60.0 * s15 * (135.0 * l * l - 256.0).max(0.0).sqrt() + 2700.0 * l;
            let c = g.cbrt();
            let h = ((2.0 * c * c + 15.0 * l * c + 480.0) / (l * c)).sqrt();
            let inner = ((l * c - c * c / 15.0 - 16.0) * h + s15 * l * c) / (c * h * l);
            0.25 + s15 * h / 60.0 + 450f64.sqrt() / 60.0 * inner.max(0.0).sqrt()
        }
    })
}

/// `d λ² q^{d-1} (1 - q) - q`, zero at the nontrivial stationary points of
/// the variational objective.
pub fn stationarity_residual(lambda: f64, q: f64, d: usize) -> f64 {
    d as f64 * lambda * lambda * q.powi(d as i32 - 1) * (1.0 - q) - q
}

/// `√d (1 + λ² q^{d-1}) / √(1 + λ² d q^{d-1})` for a given `q`.
pub fn mu_star_from_q(lambda: f64, q: f64, d: usize) -> f64 {
    let a = lambda * lambda * q.powi(d as i32 - 1);
    (d as f64).sqrt() * (1.0 + a) / (1.0 + d as f64 * a).sqrt()
}

/// Spectral norm of the observation above the transition, `d = 3, 4, 5`.
pub fn mu_star_closed(lambda: f64, d: usize) -> Result<f64> {
    Ok(mu_star_from_q(lambda, q_closed(lambda, d)?, d))
}

/// The separately printed formula for `μ*_4`, written in terms of `g_4`.
pub fn mu4_explicit(lambda: f64) -> Result<f64> {
    check_closed_form(lambda, 4)?;
    let q = q4_from(g4(lambda));
    let a = lambda * lambda * q.powi(3);
    Ok((2.0 + 2.0 * a) / (1.0 + 4.0 * a).sqrt())
}

/// Root `z_1^*(λ)` of the quartic obtained by eliminating `α` for `d = 3`.
pub fn z1_star(lambda: f64) -> Result<f64> {
    check_closed_form(lambda, 3)?;
    let l2 = lambda * lambda;
    let c = (l2 * (3.0 * l2 - 4.0).max(0.0).powi(3)).sqrt();
    Ok((18.0 * l2 * l2 + 72.0 * l2 + 2.0 * 3f64.sqrt() * c).sqrt() / (6.0 * lambda))
}

/// `λ² t^d + log(1 - t) + t`.
pub fn variational_objective(lambda: f64, t: f64, d: usize) -> f64 {
    lambda * lambda * t.powi(d as i32) + (-t).ln_1p() + t
}

/// Maximizer and maximum of the variational objective over
/// `t ∈ [(d-2)/(d-1), 1 - 1e-9]`.
///
/// On this interval the derivative has the sign of
/// `d λ² t^{d-2} (1 - t) - 1`, which is decreasing, so the objective is
/// unimodal. The interval excludes the trivial stationary point `t = 0`.
pub fn variational_sup(lambda: f64, d: usize) -> Result<(f64, f64)> {
    check_order(d)?;
    let t0 = (d - 2) as f64 / (d - 1) as f64;
    let t1 = 1.0 - VARIATIONAL_EDGE;
    let f = |t: f64| variational_objective(lambda, t, d);
    let dl2 = d as f64 * lambda * lambda;
    let h = |t: f64| dl2 * t.powi(d as i32 - 2) * (1.0 - t) - 1.0;
    let dh = |t: f64| dl2 * t.powi(d as i32 - 3) * ((d - 2) as f64 * (1.0 - t) - t);
    let mut t = golden_max(f, t0, t1, 1e-8);
    if h(t0) > 0.0 {
        let lo = (t - 1e-6).max(t0);
        let hi = (t + 1e-6).min(t1);
        if h(lo) > 0.0 && h(hi) < 0.0 {
            t = newton_bracketed(h, dh, lo, hi, 1e-16)?;
        }
    }
    Ok((t, f(t)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalThreshold {
    pub lambda_c: f64,
    /// Maximizing `t` at `λ_c`.
    pub t_star: f64,
    /// `|sup_t φ(λ_c, t)|`.
    pub residual: f64,
}

/// Phase-transition threshold `λ_c(d)`: the zero crossing of
/// `λ ↦ sup_t [λ² t^d + log(1 - t) + t]`, bracketed by
/// `[λ_s(d)(1 - 1e-3), 2 μ_0(d)]`.
pub fn lambda_c(d: usize, tol: f64) -> Result<CriticalThreshold> {
    check_order(d)?;
    let s = |l: f64| variational_sup(l, d).map(|(_, v)| v).unwrap_or(f64::NAN);
    let lo = lambda_s(d) * (1.0 - 1e-3);
    let hi = 2.0 * mu_0(d, tol)?.mu_0;
    let lambda = brent(s, lo, hi, 1e-15)?;
    let (t_star, value) = variational_sup(lambda, d)?;
    if value.abs() > tol {
        return Err(Error::Numerical(format!(
            "λ_c({d}) residual {value:e} above tolerance {tol:e}"
        )));
    }
    Ok(CriticalThreshold {
        lambda_c: lambda,
        t_star,
        residual: value.abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseSpectralNorm {
    pub mu_0: f64,
    pub z_star: f64,
    pub residual: f64,
}

/// `(1+z)/z² log(1+z) - 1/z - 1/d`, evaluated with a series near zero.
pub fn mu0_equation(z: f64, d: usize) -> f64 {
    let head = if z < 1e-3 {
        0.5 - z / 6.0 + z * z / 12.0 - z * z * z / 20.0
    } else {
        ((1.0 + z) * z.ln_1p() - z) / (z * z)
    };
    head - 1.0 / d as f64
}

fn mu0_equation_derivative(z: f64) -> f64 {
    if z < 1e-3 {
        return -1.0 / 6.0 + z / 6.0 - 3.0 * z * z / 20.0;
    }
    let l = z.ln_1p();
    // d/dz [((1+z) l - z) / z²]
    (l * z - 2.0 * ((1.0 + z) * l - z)) / (z * z * z)
}

/// Limiting spectral norm of the scaled noise tensor.
pub fn mu_0(d: usize, tol: f64) -> Result<NoiseSpectralNorm> {
    check_order(d)?;
    let mut hi = 1.0;
    while mu0_equation(hi, d) > 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Numerical(format!("no bracket for μ_0({d})")));
        }
    }
    let z = newton_bracketed(
        |z| mu0_equation(z, d),
        mu0_equation_derivative,
        0.0,
        hi,
        1e-15,
    )?;
    let residual = mu0_equation(z, d).abs();
    if residual > tol {
        return Err(Error::Numerical(format!(
            "μ_0({d}) residual {residual:e} above tolerance {tol:e}"
        )));
    }
    let dz = d as f64;
    Ok(NoiseSpectralNorm {
        mu_0: (dz + z) / (dz + dz * z).sqrt(),
        z_star: z,
        residual,
    })
}

/// Every large-`N` prediction at one `(λ, d)`. Signal-dependent fields are
/// `None` where the formulas do not apply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticPrediction {
    pub d: usize,
    pub lambda: f64,
    pub beta_d: f64,
    pub lambda_s: f64,
    pub lambda_c: f64,
    pub mu_0: f64,
    pub mu_inf: Option<f64>,
    pub alpha_inf: Option<f64>,
    pub q: Option<f64>,
    pub mu_star: Option<f64>,
    pub solver_residual: Option<f64>,
}

impl AsymptoticPrediction {
    pub fn new(lambda: f64, d: usize, tol: f64) -> Result<Self> {
        check_order(d)?;
        let ls = lambda_s(d);
        let fp = if lambda > 0.0 {
            solve_fixed_point(lambda, d, tol)?
        } else {
            None
        };
        let closed = (3..=5).contains(&d) && lambda >= ls;
        let q = if closed {
            Some(q_closed(lambda, d)?)
        } else {
            None
        };
        let mu_star = if closed {
            Some(mu_star_closed(lambda, d)?)
        } else {
            None
        };
        Ok(Self {
            d,
            lambda,
            beta_d: beta(d),
            lambda_s: ls,
            lambda_c: lambda_c(d, tol)?.lambda_c,
            mu_0: mu_0(d, tol)?.mu_0,
            mu_inf: fp.as_ref().map(|f| f.mu),
            alpha_inf: fp.as_ref().map(|f| f.alpha),
            q,
            mu_star,
            solver_residual: fp.as_ref().map(|f| f.residual),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_and_phi_at_lambda_two() {
        // μ = (16 + 2√24) / √(72 + 12√24) and α² = 1/2 + √(1/6) at λ = 2
        let s24 = 24f64.sqrt();
        let z = (16.0 + 2.0 * s24) / (72.0 + 12.0 * s24).sqrt();
        let alpha = (0.5 + (1.0f64 / 6.0).sqrt()).sqrt();
        let m = semicircle_stieltjes_real(z / 2.0, 3).unwrap();
        // m_3(x) = -3x + 3√(x² - 2/3)
        assert!((m - (-1.5 * z + 3.0 * (z * z / 4.0 - 2.0 / 3.0).sqrt())).abs() < 1e-14);
        assert!((omega_d(z, 2.0, 3).unwrap() - alpha).abs() < 1e-14);
        assert!((phi_d(z, 2.0, 3).unwrap() - z).abs() < 1e-14);
        assert!((z - 2.2558310).abs() < 5e-5 && (alpha - 0.9530225).abs() < 5e-6);
        assert!((m + 1.0492650).abs() < 5e-5);
    }

    #[test]
    fn omega_rejects_support_and_even_roots() {
        assert!(omega_d(1.0, 2.0, 3).is_err());
        assert!(omega_d(-5.0, 2.0, 4).is_err());
        assert!(omega_d(-5.0, 2.0, 5).unwrap() < 0.0);
        assert!(omega_d(3.0 * beta(4), 2.0, 4).is_ok());
    }

    #[test]
    fn fixed_point_at_lambda_two() {
        let fp = solve_fixed_point(2.0, 3, 1e-12).unwrap().unwrap();
        assert!((fp.mu - mu3_closed(2.0).unwrap()).abs() < 1e-8);
        assert!((fp.alpha - alpha3_closed(2.0).unwrap()).abs() < 1e-8);
        assert!((fp.mu - 2.2558063099263).abs() < 1e-12);
        assert!(fp.residual <= 1e-12);
        assert_eq!(fp.roots.len(), 1);
    }

    #[test]
    fn no_fixed_point_below_edge() {
        assert!(solve_fixed_point(1.0, 3, 1e-12).unwrap().is_none());
        assert!(solve_fixed_point(-1.0, 3, 1e-12).is_err());
        assert!(solve_fixed_point(1.0, 3, 0.0).is_err());
    }

    #[test]
    fn closed_forms_at_the_edge() {
        let e = 2.0 / 3f64.sqrt();
        assert!((mu3_closed(e).unwrap() - (8.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((z1_star(e).unwrap() - mu3_closed(e).unwrap()).abs() < 1e-10);
        assert!(mu3_closed(e - 1e-6).is_err());
        assert!(z1_star(1.0).is_err());
        assert!((q_closed(lambda_s(4), 4).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((q_closed(lambda_s(5), 5).unwrap() - 0.75).abs() < 1e-6);
    }

    #[test]
    fn closed_forms_at_lambda_two() {
        assert!((q_closed(2.0, 3).unwrap() - (0.5 + (8.0f64 / 48.0).sqrt())).abs() < 1e-15);
        let s24 = 24f64.sqrt();
        let mu = (16.0 + 2.0 * s24) / (72.0 + 12.0 * s24).sqrt();
        assert!((mu3_closed(2.0).unwrap() - mu).abs() < 1e-15);
        assert!((alpha3_closed(2.0).unwrap() - 0.9530206138714226).abs() < 1e-15);
        assert!((mu_star_closed(2.0, 3).unwrap() - mu3_closed(2.0).unwrap()).abs() < 1e-12);
        assert!((mu4_explicit(2.0).unwrap() - mu_star_closed(2.0, 4).unwrap()).abs() < 1e-10);
        assert!((z1_star(2.0).unwrap() - mu).abs() < 1e-14);
        assert!(q_closed(2.0, 6).is_err());
    }

    #[test]
    fn stationarity_of_closed_forms() {
        for d in 3..=5 {
            for k in 0..40 {
                let l = lambda_s(d) + 0.2 * k as f64;
                let q = q_closed(l, d).unwrap();
                assert!(q > 0.0 && q < 1.0);
                assert!(stationarity_residual(l, q, d).abs() < 1e-10, "d={d} λ={l}");
            }
        }
    }

    #[test]
    fn signal_dominates_at_large_lambda() {
        for d in 3..=5 {
            let r = mu_star_closed(100.0, d).unwrap() / 100.0;
            assert!((r - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn lambda_s_values() {
        assert!((lambda_s(3) - 1.1547005).abs() < 1e-7);
        assert!((lambda_s(4) - (27.0f64 / 16.0).sqrt()).abs() < 1e-15);
        for d in 3..6 {
            assert!(lambda_s(d) < lambda_s(d + 1));
        }
    }

    #[test]
    fn mu0_solves_its_equation() {
        let expected = [1.6569983635274734, 1.7940850281792544, 1.8879888263689186];
        for (d, want) in (3..=5).zip(expected) {
            let s = mu_0(d, 1e-12).unwrap();
            assert!(s.residual < 1e-12);
            assert!((s.mu_0 - want).abs() < 1e-10, "d={d}: {}", s.mu_0);
            assert!(s.mu_0 > (d - 1) as f64 * beta(d));
        }
    }

    #[test]
    fn mu0_series_matches_direct_form() {
        for z in [2e-4f64, 5e-4, 9.9e-4] {
            let direct = ((1.0 + z) * z.ln_1p() - z) / (z * z) - 1.0 / 3.0;
            assert!((mu0_equation(z, 3) - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn lambda_c_ordering_and_touching_point() {
        let expected = [1.206555734568037, 1.4056689182593491, 1.5322592257847771];
        for (d, want) in (3..=5).zip(expected) {
            let c = lambda_c(d, 1e-10).unwrap();
            assert!((c.lambda_c - want).abs() < 1e-8, "d={d}: {}", c.lambda_c);
            assert!(lambda_s(d) < c.lambda_c && c.lambda_c < mu_0(d, 1e-12).unwrap().mu_0);
            assert!((c.t_star - q_closed(c.lambda_c, d).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn variational_bracket_signs() {
        for d in 3..=5 {
            assert!(variational_sup(lambda_s(d) * (1.0 - 1e-3), d).unwrap().1 < 0.0);
            let m0 = mu_0(d, 1e-12).unwrap().mu_0;
            assert!(variational_sup(2.0 * m0, d).unwrap().1 > 0.0);
        }
    }

    #[test]
    fn prediction_leaves_subcritical_fields_empty() {
        let p = AsymptoticPrediction::new(0.5, 3, 1e-10).unwrap();
        assert!(p.mu_inf.is_none() && p.q.is_none() && p.mu_star.is_none());
        let p = AsymptoticPrediction::new(3.0, 3, 1e-10).unwrap();
        assert!((p.q.unwrap() - p.alpha_inf.unwrap().powi(2)).abs() < 1e-8);
    }
}
