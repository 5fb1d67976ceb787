use stl_core::asymptotics::*;
use stl_core::spectral::{beta, semicircle_stieltjes_real};

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

#[test]
fn cubic_fixed_point_matches_closed_forms() {
    for l in grid(1.16, 10.0, 50) {
        let fp = solve_fixed_point(l, 3, 1e-12)
            .unwrap()
            .expect("root above λ_s");
        assert!((fp.mu - mu3_closed(l).unwrap()).abs() < 1e-8, "λ={l}");
        assert!((fp.alpha - alpha3_closed(l).unwrap()).abs() < 1e-8, "λ={l}");
        assert!(
            (mu3_closed(l).unwrap() - z1_star(l).unwrap()).abs() < 1e-12,
            "λ={l}"
        );
    }
}

#[test]
fn fixed_point_matches_closed_forms_for_orders_four_and_five() {
    for d in [4, 5] {
        for l in grid(lambda_s(d) + 0.02, 8.0, 30) {
            let fp = solve_fixed_point(l, d, 1e-12)
                .unwrap()
                .expect("root above λ_s");
            assert!(
                (fp.mu - mu_star_closed(l, d).unwrap()).abs() < 1e-6,
                "d={d} λ={l}"
            );
            assert!(
                (fp.alpha.powi(2) - q_closed(l, d).unwrap()).abs() < 1e-6,
                "d={d} λ={l}"
            );
        }
    }
}

#[test]
fn consistency_chain_at_the_solution() {
    for d in 3..=5 {
        for l in grid(lambda_s(d) + 0.05, 6.0, 15) {
            let fp = solve_fixed_point(l, d, 1e-12).unwrap().unwrap();
            let m = semicircle_stieltjes_real(fp.mu / (d - 1) as f64, d).unwrap();
            let rebuilt = l * fp.alpha.powi(d as i32) - m / (d - 1) as f64;
            assert!((rebuilt - fp.mu).abs() < 1e-8);
            assert!((omega_d(fp.mu, l, d).unwrap() - fp.alpha).abs() < 1e-8);
            assert!(fp.alpha > 0.0 && fp.alpha <= 1.0);
            assert!(fp.mu > (d - 1) as f64 * beta(d));
        }
    }
}

#[test]
fn no_solution_below_the_edge() {
    assert!(solve_fixed_point(1.0, 3, 1e-12).unwrap().is_none());
    assert!(solve_fixed_point(1.2, 4, 1e-12).unwrap().is_none());
}

#[test]
fn fixed_point_holds_at_the_edge() {
    let e = lambda_s(3);
    let z = mu3_closed(e).unwrap();
    assert!((phi_d(z, e, 3).unwrap() - z).abs() < 1e-8);
    let fp = solve_fixed_point(e, 3, 1e-10).unwrap().unwrap();
    assert!((fp.mu - z).abs() < 1e-6);
}

#[test]
fn omega_decreases_in_lambda() {
    let z = 2.5;
    let mut prev = f64::INFINITY;
    for l in grid(0.5, 50.0, 100) {
        let w = omega_d(z, l, 3).unwrap();
        assert!(w < prev && w > 0.0);
        prev = w;
    }
}

#[test]
fn q_increases_towards_one() {
    for d in 3..=5 {
        let mut prev = 0.0;
        for l in grid(lambda_s(d), 60.0, 200) {
            let q = q_closed(l, d).unwrap();
            assert!(q > prev && q < 1.0, "d={d} λ={l}");
            prev = q;
        }
        assert!(prev > 0.999);
    }
}

#[test]
fn q_satisfies_stationarity_on_grids() {
    for d in 3..=5 {
        for l in grid(lambda_s(d) + 0.02, 8.0, 30) {
            let q = q_closed(l, d).unwrap();
            assert!(stationarity_residual(l, q, d).abs() < 1e-10);
        }
    }
}

#[test]
fn explicit_mu4_agrees_with_general_form() {
    for l in grid(lambda_s(4), 8.0, 40) {
        assert!((mu4_explicit(l).unwrap() - mu_star_closed(l, 4).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn z1_star_equals_mu3_on_a_grid() {
    for l in grid(lambda_s(3), 10.0, 60) {
        assert!((z1_star(l).unwrap() - mu3_closed(l).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn threshold_ordering() {
    for d in 3..=5 {
        let c = lambda_c(d, 1e-10).unwrap();
        let m = mu_0(d, 1e-12).unwrap();
        assert!(c.residual < 1e-10 && m.residual < 1e-10);
        assert!(lambda_s(d) < c.lambda_c && c.lambda_c < m.mu_0);
    }
}
