//! The limiting semicircle law of contractions `W·v^{d-2} / √N`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Result};

/// Support half-width `β_d = 2 / √(d(d-1))`.
pub fn beta(d: usize) -> f64 {
    2.0 / ((d * (d - 1)) as f64).sqrt()
}

/// Semicircle law on `[-β_d, β_d]` for tensor order `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemicircleLaw {
    d: usize,
    beta: f64,
}

impl SemicircleLaw {
    pub fn new(d: usize) -> Result<Self> {
        if d < 3 {
            return domain(format!("semicircle law needs tensor order d >= 3, got {d}"));
        }
        Ok(Self { d, beta: beta(d) })
    }

    pub fn order(&self) -> usize {
        self.d
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn density(&self, x: f64) -> f64 {
        let b2 = self.beta * self.beta;
        2.0 / (PI * b2) * (b2 - x * x).max(0.0).sqrt()
    }

    /// Closed-form distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        let b = self.beta;
        if x <= -b {
            return 0.0;
        }
        if x >= b {
            return 1.0;
        }
        0.5 + x * (b * b - x * x).sqrt() / (PI * b * b) + (x / b).asin() / PI
    }

    /// Stieltjes transform `m(z) = ∫ ρ(t) / (t - z) dt` off the support.
    ///
    /// Uses `√(z-β)·√(z+β)` with principal roots, which behaves like `z` at
    /// infinity, so `m(z) ~ -1/z`.
    pub fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 && z.re.abs() < self.beta {
            return domain(format!(
                "z = {} lies on the support [-{b}, {b}]",
                z.re,
                b = self.beta
            ));
        }
        let s = (z - self.beta).sqrt() * (z + self.beta).sqrt();
        Ok(-2.0 / (z + s))
    }

    /// Real branch for `|x| >= β`: `-2 / (x + sign(x)·√(x² - β²))`.
    pub fn stieltjes_real(&self, x: f64) -> Result<f64> {
        if !(x.abs() >= self.beta) {
            return domain(format!(
                "x = {x} lies inside the support [-{b}, {b}]",
                b = self.beta
            ));
        }
        let s = (x * x - self.beta * self.beta).max(0.0).sqrt();
        Ok(-2.0 / (x + x.signum() * s))
    }

    /// Residual of `m²/(d(d-1)) + z·m + 1 = 0`.
    pub fn quadratic_residual(&self, z: Complex64, m: Complex64) -> f64 {
        let dd = (self.d * (self.d - 1)) as f64;
        (m * m / dd + z * m + 1.0).norm()
    }
}

/// `m_d(z)` for complex `z` off `[-β_d, β_d]`.
pub fn semicircle_stieltjes(z: Complex64, d: usize) -> Result<Complex64> {
    SemicircleLaw::new(d)?.stieltjes(z)
}

/// `m_d(x)` for real `|x| >= β_d`.
pub fn semicircle_stieltjes_real(x: f64, d: usize) -> Result<f64> {
    SemicircleLaw::new(d)?.stieltjes_real(x)
}

pub fn semicircle_density(x: f64, d: usize) -> Result<f64> {
    Ok(SemicircleLaw::new(d)?.density(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_values() {
        assert!((beta(3) - 0.8164966).abs() < 1e-6);
        assert!((beta(4) - 0.5773503).abs() < 1e-6);
        for d in 3..10 {
            assert!(beta(d + 1) < beta(d));
        }
    }

    #[test]
    fn stieltjes_at_twice_the_edge() {
        let law = SemicircleLaw::new(3).unwrap();
        let z = 2.0 * law.beta();
        let m = law.stieltjes_real(z).unwrap();
        // m_3(z) = 3(-z + √(z² - 2/3)) with z² = 8/3
        let exact = 3.0 * (2f64.sqrt() - (8.0f64 / 3.0).sqrt());
        assert!((m - exact).abs() < 1e-14, "{m}");
        assert!((m - -0.65634).abs() < 1e-5);
        assert!(law.quadratic_residual(Complex64::new(z, 0.0), Complex64::new(m, 0.0)) < 1e-12);
        let mc = law.stieltjes(Complex64::new(z, 0.0)).unwrap();
        assert!((mc.re - m).abs() < 1e-15 && mc.im == 0.0);
    }

    #[test]
    fn stieltjes_far_field_and_negative_axis() {
        for d in 3..=6 {
            let law = SemicircleLaw::new(d).unwrap();
            assert!((law.stieltjes_real(100.0).unwrap() + 0.01).abs() < 1e-3);
            let a = law.stieltjes_real(-1.7).unwrap();
            let b = law.stieltjes_real(1.7).unwrap();
            assert!((a + b).abs() < 1e-15 && a > 0.0);
        }
    }

    #[test]
    fn stieltjes_complex_residual() {
        let law = SemicircleLaw::new(3).unwrap();
        let z = Complex64::new(1.0, 1.0);
        let m = law.stieltjes(z).unwrap();
        assert!(law.quadratic_residual(z, m) < 1e-12);
        assert!(m.im > 0.0);
    }

    #[test]
    fn support_is_rejected() {
        assert!(semicircle_stieltjes_real(0.5, 3).is_err());
        assert!(semicircle_stieltjes(Complex64::new(-0.2, 0.0), 3).is_err());
        assert!(semicircle_stieltjes(Complex64::new(-0.2, 1e-3), 3).is_ok());
        assert!(SemicircleLaw::new(2).is_err());
    }

    #[test]
    fn density_values() {
        let law = SemicircleLaw::new(3).unwrap();
        assert_eq!(law.density(law.beta()), 0.0);
        assert_eq!(law.density(-law.beta()), 0.0);
        assert!((law.density(0.0) - 0.7796968).abs() < 1e-7);
        assert_eq!(law.cdf(0.0), 0.5);
        assert_eq!(law.cdf(-1.0), 0.0);
        assert_eq!(law.cdf(1.0), 1.0);
    }
}
