use num_complex::Complex64;
use serde::Serialize;

use super::eigh::eigvalsh;
use super::semicircle::SemicircleLaw;
use crate::error::{domain, Error, Result};
use crate::linalg::SymMatrix;
use crate::tensor::ContractionMatrix;

/// Minimum distance between a resolvent argument and the spectrum.
pub const RESOLVENT_POLE_TOL: f64 = 1e-10;

/// Empirical spectral measure `(1/N) Σ δ_{μ_i}` stored as sorted eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    eigenvalues: Vec<f64>,
}

impl SpectralMeasure {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        Self { eigenvalues }
    }

    pub fn from_matrix(m: &SymMatrix) -> Result<Self> {
        Ok(Self {
            eigenvalues: eigvalsh(m)?,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn top(&self) -> Option<f64> {
        self.eigenvalues.last().copied()
    }

    /// Sup-distance between the empirical CDF and the semicircle CDF,
    /// optionally dropping the largest eigenvalue (`exclude_top = 1`).
    pub fn ks_distance(&self, d: usize, exclude_top: usize) -> Result<f64> {
        if exclude_top > 1 {
            return domain(format!("exclude_top must be 0 or 1, got {exclude_top}"));
        }
        let law = SemicircleLaw::new(d)?;
        let kept = &self.eigenvalues[..self.len().saturating_sub(exclude_top)];
        let n = kept.len() as f64;
        let mut worst: f64 = 0.0;
        for (i, &x) in kept.iter().enumerate() {
            let f = law.cdf(x);
            worst = worst
                .max((i as f64 / n - f).abs())
                .max(((i + 1) as f64 / n - f).abs());
        }
        Ok(worst)
    }

    /// `(1/N) Σ 1/(μ_i - z)`.
    pub fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        let n = self.len();
        if n == 0 {
            return domain("empty spectrum");
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for &mu in &self.eigenvalues {
            let gap = Complex64::new(mu, 0.0) - z;
            if gap.norm() <= RESOLVENT_POLE_TOL {
                return Err(Error::Singular(format!(
                    "z = {z} is within {RESOLVENT_POLE_TOL:e} of eigenvalue {mu}"
                )));
            }
            acc += 1.0 / gap;
        }
        Ok(acc / n as f64)
    }

    /// Quantile by linear interpolation between order statistics.
    pub fn quantile(&self, p: f64) -> f64 {
        let v = &self.eigenvalues;
        let pos = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
    }

    /// Histogram on `[lo, hi]` with Freedman–Diaconis bin width.
    pub fn histogram(&self, lo: f64, hi: f64) -> Histogram {
        let n = self.len().max(1) as f64;
        let iqr = if self.len() > 1 {
            self.quantile(0.75) - self.quantile(0.25)
        } else {
            0.0
        };
        let width = 2.0 * iqr / n.cbrt();
        let bins = if width > 0.0 {
            ((hi - lo) / width).ceil().clamp(1.0, 1000.0) as usize
        } else {
            (n.sqrt().ceil() as usize).max(1)
        };
        let step = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for &x in &self.eigenvalues {
            if x < lo || x > hi {
                continue;
            }
            let b = (((x - lo) / step) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let edges = (0..=bins).map(|k| lo + k as f64 * step).collect();
        let density = counts.iter().map(|&c| c as f64 / (n * step)).collect();
        Histogram {
            edges,
            counts,
            density,
        }
    }
}

/// Plot range for histograms: `[-1.5β, max(1.5β, top + 0.1)]`.
pub fn plot_range(beta: f64, top: f64) -> (f64, f64) {
    (-1.5 * beta, (1.5 * beta).max(top + 0.1))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Counts normalized by `N · bin width`, comparable to a density.
    pub density: Vec<f64>,
}

pub fn empirical_spectral_measure(c: &ContractionMatrix) -> Result<SpectralMeasure> {
    SpectralMeasure::from_matrix(&c.matrix)
}

/// `(1/N) tr (M - zI)^{-1}` from the eigenvalues of `m`.
pub fn resolvent_trace(m: &SymMatrix, z: Complex64) -> Result<Complex64> {
    SpectralMeasure::from_matrix(m)?.stieltjes(z)
}

pub fn resolvent_trace_real(m: &SymMatrix, z: f64) -> Result<f64> {
    Ok(resolvent_trace(m, Complex64::new(z, 0.0))?.re)
}
