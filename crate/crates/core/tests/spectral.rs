use num_complex::Complex64;
use rand::Rng;
use stl_core::ensemble::{sample_goe_tensor, sample_unit_vector, SeedSpec};
use stl_core::linalg::{dot, SymMatrix};
use stl_core::spectral::{
    beta, eigh, empirical_spectral_measure, resolvent_trace, resolvent_trace_real,
    semicircle_density, semicircle_stieltjes, semicircle_stieltjes_real, SemicircleLaw,
    SpectralMeasure,
};

fn random_symmetric(n: usize, seed: u64) -> SymMatrix {
    let mut rng = SeedSpec::new(seed, 0).rng();
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let x: f64 = rng.random_range(-1.0..1.0);
            *m.at_mut(i, j) = x;
            *m.at_mut(j, i) = x;
        }
    }
    m
}

// eigenvalues of a symmetric 3x3 from the trigonometric solution of its characteristic cubic
fn cubic_eigenvalues(a: &SymMatrix) -> [f64; 3] {
    let q = (a.at(0, 0) + a.at(1, 1) + a.at(2, 2)) / 3.0;
    let p1 = a.at(0, 1).powi(2) + a.at(0, 2).powi(2) + a.at(1, 2).powi(2);
    let p2 = (0..3).map(|i| (a.at(i, i) - q).powi(2)).sum::<f64>() + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = SymMatrix::from_fn(3, |i, j| (a.at(i, j) - if i == j { q } else { 0.0 }) / p);
    let det = b.at(0, 0) * (b.at(1, 1) * b.at(2, 2) - b.at(1, 2) * b.at(2, 1))
        - b.at(0, 1) * (b.at(1, 0) * b.at(2, 2) - b.at(1, 2) * b.at(2, 0))
        + b.at(0, 2) * (b.at(1, 0) * b.at(2, 1) - b.at(1, 1) * b.at(2, 0));
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let mut e = [lo, 3.0 * q - hi - lo, hi];
    e.sort_by(f64::total_cmp);
    e
}

#[test]
fn three_by_three_matches_the_cubic() {
    for seed in 0..50 {
        let a = random_symmetric(3, seed);
        let got = eigh(&a).unwrap().values;
        let want = cubic_eigenvalues(&a);
        for k in 0..3 {
            assert!((got[k] - want[k]).abs() < 1e-10, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn residuals_orthonormality_and_round_trip() {
    for (seed, n) in [(1, 2), (2, 5), (3, 17), (4, 64), (5, 200)] {
        let a = random_symmetric(n, seed);
        let e = eigh(&a).unwrap();
        let scale = a.frobenius_norm();
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        for (mu, v) in e.values.iter().zip(&e.vectors) {
            let av = a.matvec(v);
            let r: f64 = av
                .iter()
                .zip(v)
                .map(|(x, y)| (x - mu * y).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(r <= 1e-10 * scale, "n={n} residual {r:e}");
        }
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&e.vectors[i], &e.vectors[j]) - want).abs() < 1e-10);
            }
        }
        let back = e.reconstruct();
        let err = SymMatrix::from_fn(n, |i, j| back.at(i, j) - a.at(i, j)).frobenius_norm();
        assert!(err <= 1e-9 * scale, "n={n} round trip {err:e}");
    }
}

#[test]
fn stieltjes_quadratic_identity_off_the_support() {
    let mut rng = SeedSpec::new(21, 0).rng();
    for d in 3..=6 {
        let c = (d * (d - 1)) as f64;
        for _ in 0..100 {
            let z = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(0.01..3.0));
            let m = semicircle_stieltjes(z, d).unwrap();
            assert!((m * m / c + z * m + 1.0).norm() < 1e-12, "d={d} z={z}");
            // lower half plane by conjugation
            let mc = semicircle_stieltjes(z.conj(), d).unwrap();
            assert!((mc - m.conj()).norm() < 1e-12);
        }
        let b = beta(d);
        for x in [1.01 * b, 2.0 * b, 7.0, -1.5 * b, -40.0] {
            let m = semicircle_stieltjes_real(x, d).unwrap();
            assert!((m * m / c + x * m + 1.0).abs() < 1e-12, "d={d} x={x}");
            assert!(m * x < 0.0);
        }
        assert!((semicircle_stieltjes_real(100.0, d).unwrap() + 0.01).abs() < 1e-3);
    }
    let b3 = beta(3);
    let exact = 3.0 * (2f64.sqrt() - (8.0f64 / 3.0).sqrt());
    assert!((semicircle_stieltjes_real(2.0 * b3, 3).unwrap() - exact).abs() < 1e-14);
}

#[test]
fn imaginary_part_recovers_the_density() {
    let eps = 1e-6;
    for d in [3, 4, 5] {
        let b = beta(d);
        for k in 1..40 {
            let x = -b + 2.0 * b * k as f64 / 40.0;
            let m = semicircle_stieltjes(Complex64::new(x, eps), d).unwrap();
            let rho = semicircle_density(x, d).unwrap();
            assert!(
                (m.im / std::f64::consts::PI - rho).abs() < 1e-3,
                "d={d} x={x}"
            );
        }
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn go(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        go(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
            + go(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    go(f, a, fa, b, fb, whole, m, fm, tol, 50)
}

#[test]
fn density_has_unit_mass() {
    for d in 3..=6 {
        let b = beta(d);
        let mass = adaptive_simpson(&|x| semicircle_density(x, d).unwrap(), -b, b, 1e-12);
        assert!((mass - 1.0).abs() < 1e-8, "d={d} mass {mass}");
        assert_eq!(semicircle_density(b, d).unwrap(), 0.0);
        assert_eq!(semicircle_density(-b, d).unwrap(), 0.0);
    }
    assert!((semicircle_density(0.0, 3).unwrap() - 0.7796968).abs() < 1e-6);
    assert!((beta(3) - 0.8164966).abs() < 1e-6);
    assert!((3..6).all(|d| beta(d + 1) < beta(d)));
}

#[test]
fn samples_from_the_law_itself_are_close() {
    let law = SemicircleLaw::new(3).unwrap();
    let b = law.beta();
    let mut rng = SeedSpec::new(31, 0).rng();
    let xs: Vec<f64> = (0..10_000)
        .map(|_| {
            let p: f64 = rng.random();
            let (mut lo, mut hi) = (-b, b);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if law.cdf(mid) < p {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    let ks = SpectralMeasure::from_eigenvalues(xs)
        .ks_distance(3, 0)
        .unwrap();
    assert!(ks < 0.02, "ks {ks}");
}

#[test]
fn empirical_measure_delegates_to_eigh() {
    let w = sample_goe_tensor(3, 4, SeedSpec::new(2, 2)).unwrap();
    let v = sample_unit_vector(4, SeedSpec::new(2, 3)).unwrap();
    let c = w.contract_to_matrix(&v).unwrap();
    let m = empirical_spectral_measure(&c).unwrap();
    assert_eq!(m.eigenvalues(), eigh(&c.matrix).unwrap().values.as_slice());
    assert_eq!(m.len(), 4);
}

#[test]
fn resolvent_trace_concentrates_on_the_stieltjes_transform() {
    let n = 600;
    let w = sample_goe_tensor(3, n, SeedSpec::new(41, 0)).unwrap();
    let v = sample_unit_vector(n, SeedSpec::new(41, 1)).unwrap();
    let scale = 1.0 / (n as f64).sqrt();
    let m = w.contract_to_matrix(&v).unwrap().matrix.scaled(scale);
    let z = 2.0 * beta(3);
    let got = resolvent_trace_real(&m, z).unwrap();
    assert!(
        (got - semicircle_stieltjes_real(z, 3).unwrap()).abs() < 0.05,
        "{got}"
    );
    let far = resolvent_trace(&m, Complex64::new(100.0, 0.0)).unwrap();
    assert!((far.re + 0.01).abs() < 1e-3);
}
