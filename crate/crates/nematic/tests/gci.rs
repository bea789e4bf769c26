mod oracles;

use approx::assert_relative_eq;
use nematic::equilibria::{s2, ModelParams};
use nematic::gci::*;
use nematic::leslie::leslie_coefficients_at_eta;

const ETAS: [f64; 5] = [0.5, 2.0, 6.0, 15.0, 35.0];

#[test]
fn h_is_odd_and_non_positive_on_the_upper_half() {
    for n in [2usize, 3, 4, 6] {
        for eta in ETAS {
            let sol = solve_h(eta, n, DEFAULT_BASIS).unwrap();
            for i in 0..=100 {
                let r = i as f64 / 100.0;
                assert!((sol.h(r) + sol.h(-r)).abs() < 1e-14, "n = {n}, eta = {eta}, r = {r}");
                assert!(sol.h(r) <= 1e-8, "n = {n}, eta = {eta}, r = {r}: {}", sol.h(r));
            }
        }
    }
}

#[test]
fn linear_profile_without_alignment() {
    for n in 2..=5 {
        let sol = solve_h(0.0, n, DEFAULT_BASIS).unwrap();
        for r in [-0.9, -0.2, 0.4, 1.0] {
            assert_relative_eq!(sol.h(r), -r / (2.0 * n as f64), epsilon = 1e-14);
        }
        let g = solve_g(0.0, n, DEFAULT_BASIS).unwrap();
        assert!(g.g(1.1).abs() < 1e-15);
    }
}

#[test]
fn doubling_the_basis_leaves_h_unchanged() {
    for n in [2usize, 3, 5] {
        for eta in ETAS {
            let a = solve_h(eta, n, DEFAULT_BASIS).unwrap();
            let b = solve_h(eta, n, 2 * DEFAULT_BASIS).unwrap();
            let diff = (0..=200)
                .map(|i| {
                    let r = -1.0 + i as f64 / 100.0;
                    (a.h(r) - b.h(r)).abs()
                })
                .fold(0.0, f64::max);
            assert!(diff < 1e-9, "n = {n}, eta = {eta}: {diff}");
        }
    }
}

#[test]
fn strong_residual_is_small() {
    for n in [2usize, 3, 4] {
        for eta in ETAS {
            let sol = solve_h(eta, n, DEFAULT_BASIS).unwrap();
            assert!(sol.residual() < RESIDUAL_TOLERANCE);
            assert!(sol.compatibility_defect() < 1e-10);
            for i in 1..20 {
                let r = -0.95 + 0.1 * i as f64;
                let scale = 1.0 + eta * eta;
                assert!(sol.strong_residual(r).abs() < 1e-8 * scale, "n = {n}, eta = {eta}, r = {r}");
            }
        }
    }
}

#[test]
fn jacobi_and_energy_schemes_agree() {
    for n in [2usize, 3, 4] {
        for eta in [1.0, 5.0, 10.0] {
            let a = solve_h_with(eta, n, DEFAULT_BASIS, Scheme::Jacobi).unwrap();
            let b = solve_h_with(eta, n, DEFAULT_BASIS, Scheme::Energy).unwrap();
            for i in 0..=20 {
                let r = i as f64 / 20.0;
                assert!((a.h(r) - b.h(r)).abs() < 1e-9, "n = {n}, eta = {eta}, r = {r}");
            }
        }
    }
    let weak = solve_h_with(25.0, 3, DEFAULT_BASIS, Scheme::Energy);
    assert!(matches!(weak, Err(nematic::Error::ResolutionInsufficient { .. })));
}

#[test]
fn g_profile_sign_and_boundary_values() {
    for n in [2usize, 3, 4] {
        for eta in [1.0, 10.0] {
            let prof = solve_g(eta, n, DEFAULT_BASIS).unwrap();
            let sol = prof.solution();
            for i in 1..100 {
                let theta = std::f64::consts::PI * i as f64 / 100.0;
                let g = prof.g(theta);
                assert_relative_eq!(g, -2.0 * eta * sol.h(theta.cos()) * theta.sin(), epsilon = 1e-14);
                assert!(g * theta.cos() >= -1e-12);
                if (0.05..3.09).contains(&theta) {
                    assert!(prof.residual(theta).abs() < 1e-7 * (1.0 + eta * eta), "n = {n}, theta = {theta}");
                }
            }
            assert!(prof.g(0.0).abs() < 1e-15);
            assert!(prof.g(std::f64::consts::PI).abs() < 1e-13);
        }
    }
}

#[test]
fn two_dimensional_closed_form() {
    let cf = h_closed_form_n2(5.0, 60).unwrap();
    for i in 1..40 {
        let theta = 0.08 * i as f64;
        assert!(cf.residual(theta).abs() < 1e-10);
    }
    for eta in [0.5, 5.0, 20.0] {
        let cf = h_closed_form_n2(eta, 80).unwrap();
        let sol = solve_h(eta, 2, DEFAULT_BASIS).unwrap();
        for r in [0.0, 0.2, 0.55, 0.9] {
            let oracle = if r == 0.0 { 0.0 } else { oracles::h_n2(eta, r) };
            assert!((cf.h(r) - oracle).abs() < 1e-11, "eta = {eta}, r = {r}");
            assert!((sol.h(r) - oracle).abs() < 1e-10, "eta = {eta}, r = {r}");
        }
        for t in [0.3, 1.2, 2.5] {
            assert!((cf.g(t) - oracles::g_n2(eta, t)).abs() < 1e-11);
        }
    }
    assert_relative_eq!(h_closed_form_n2(0.0, 8).unwrap().h(0.6), -0.15, epsilon = 1e-15);
}

#[test]
fn gamma_tilde_relations() {
    for n in [2usize, 3, 4] {
        for eta in [1.0, 6.0, 20.0] {
            let rho = 1.7;
            let sol = solve_h(eta, n, DEFAULT_BASIS).unwrap();
            let gt = gamma_tildes(eta, n, rho, &sol).unwrap();
            let nf = n as f64;
            assert_relative_eq!(gt.gamma3, (1.0 - nf / eta) * gt.gamma1 - 2.0 * gt.gamma2, epsilon = 1e-14);
            // g U' = -4η² h X (1 - X²)
            let bracket = bracket_g_du(eta, n, &sol).unwrap();
            let from_bracket = -rho * bracket / (2.0 * eta * (nf - 1.0));
            assert!((gt.gamma1 - from_bracket).abs() < 1e-11 * gt.gamma1.abs().max(1e-3));
            assert!(gt.gamma1 < 0.0);
        }
    }
}

#[test]
fn mobility_constant_relations() {
    for n in [2usize, 3, 5] {
        for eta in [0.8, 4.0, 12.0, 30.0] {
            let sol = solve_h(eta, n, DEFAULT_BASIS).unwrap();
            let ct = constant_c_lambda0(eta, n, &sol).unwrap();
            assert!(ct > 0.0);
            let lambda = 0.7;
            let c = constant_c(eta, n, lambda, &sol).unwrap();
            assert_relative_eq!(c, lambda * ct, epsilon = 1e-14);
            let gt = gamma_tildes(eta, n, 1.0, &sol).unwrap();
            let nf = n as f64;
            let alt = lambda * (nf / eta - 1.0 + 2.0 * gt.gamma2 / gt.gamma1);
            assert!((c - alt).abs() < 1e-9 * c, "n = {n}, eta = {eta}: {c} vs {alt}");
            assert!((c_over_lambda(eta, n).unwrap() - ct).abs() < 1e-12 * ct);
        }
    }
}

#[test]
fn mobility_constant_matches_two_dimensional_oracle() {
    for eta in [0.5, 3.0, 10.0, 25.0] {
        let ct = c_over_lambda(eta, 2).unwrap();
        let oracle = oracles::c_tilde_n2(eta);
        assert!((ct - oracle).abs() < 1e-10 * oracle, "eta = {eta}: {ct} vs {oracle}");
    }
}

#[test]
fn mobility_constant_grows_like_n_over_eta() {
    for n in [2usize, 3, 4] {
        let eta = 1e-3;
        let ct = c_over_lambda(eta, n).unwrap();
        assert!((eta * ct - n as f64).abs() < 1e-2, "n = {n}: {}", eta * ct);
    }
}

#[test]
fn mobility_constant_is_independent_of_density() {
    let eta = 6.0;
    let mut values = Vec::new();
    for alpha in [5.0, 10.0, 40.0] {
        let p = ModelParams::new(3, alpha, 0.9, 0.5, 0.1).unwrap();
        values.push(leslie_coefficients_at_eta(&p, eta).unwrap().c);
    }
    assert!(values.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-14 * w[0]));
    let sol = solve_h(eta, 3, DEFAULT_BASIS).unwrap();
    assert!((values[0] - constant_c(eta, 3, 0.9, &sol).unwrap()).abs() < 1e-13);
}

#[test]
fn degenerate_inputs() {
    let sol = solve_h(3.0, 3, DEFAULT_BASIS).unwrap();
    assert!(matches!(constant_c(3.0, 3, 0.0, &sol), Err(nematic::Error::LambdaZero)));
    assert!(gamma_tildes(4.0, 3, 1.0, &sol).is_err());
    assert!(gamma_tildes(3.0, 2, 1.0, &sol).is_err());
    assert!(solve_h(-1.0, 3, DEFAULT_BASIS).is_err());
    assert!(s2(3.0, 3).unwrap() > 0.0);
}
