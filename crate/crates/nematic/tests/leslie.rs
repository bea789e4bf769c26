use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use nematic::equilibria::{rho_of_eta, s2, s2_prime, ModelParams};
use nematic::leslie::*;
use nematic::tensor::projector_perp;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params() -> ModelParams {
    ModelParams::new(3, 10.0, 1.0, 0.5, 0.2).unwrap()
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let len = v.norm();
    v / len
}

fn random_strain(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let mut e = (&m + m.transpose()) * 0.5;
    let tr = e.trace() / n as f64;
    for i in 0..n {
        e[(i, i)] -= tr;
    }
    e
}

fn random_spin(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&m - m.transpose()) * 0.5
}

/// Jet with `Ω·∂ᵢΩ = 0` and density gradient `∇ρ` chosen freely.
fn random_jet(rng: &mut ChaCha8Rng, n: usize, eta: f64, rho: f64, grad_rho: DVector<f64>) -> FieldJet {
    let omega = random_unit(rng, n);
    let raw = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    FieldJet {
        rho,
        eta,
        grad_rho,
        grad_eta: DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)),
        grad_omega: raw * projector_perp(&omega),
        lap_eta_omega: DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)),
        omega,
    }
}

#[test]
fn isotropic_substitution_leaves_only_alpha4() {
    for n in [2usize, 3, 5] {
        let p = ModelParams::new(n, 10.0, 0.8, 0.3, 0.1).unwrap();
        let l = assemble_leslie(&p, 1.0, 1.0, 0.0, 0.0, 1.7);
        let nf = n as f64;
        let z = p.zeta - p.lambda * p.lambda;
        for (i, &a) in l.alpha.iter().enumerate() {
            if i == 3 {
                assert_relative_eq!(a, (p.lambda * p.lambda + 2.0 * z / (nf + 2.0)) / nf, epsilon = 1e-15);
            } else {
                assert_eq!(a, 0.0, "alpha{} = {a}", i + 1);
            }
        }
    }
}

#[test]
fn rotational_viscosity_is_positive() {
    for lambda in [-0.8, 0.3, 1.0] {
        let p = ModelParams::new(3, 10.0, lambda, 0.5, 0.1).unwrap();
        for eta in [3.0, 8.0, 30.0] {
            let l = leslie_coefficients_at_eta(&p, eta).unwrap();
            assert!(l.gamma1 > 0.0, "lambda = {lambda}, eta = {eta}");
            assert_relative_eq!(l.gamma1, l.alpha[2] - l.alpha[1], epsilon = 1e-13);
            assert_relative_eq!(l.gamma2, l.alpha[5] - l.alpha[4], epsilon = 1e-13);
            assert!(l.parodi_defect().abs() < 1e-14);
        }
    }
}

#[test]
fn branch_and_eta_entry_points_agree() {
    let p = params();
    let a = leslie_coefficients_at_eta(&p, 9.0).unwrap();
    let b = leslie_coefficients(&p, a.rho).unwrap();
    assert!((a.eta - b.eta).abs() < 1e-9 * a.eta);
    for i in 0..6 {
        assert!((a.alpha[i] - b.alpha[i]).abs() < 1e-8);
    }
    let lz = ModelParams::new(3, 10.0, 0.0, 0.5, 0.1).unwrap();
    assert!(matches!(leslie_coefficients(&lz, 1.0), Err(nematic::Error::LambdaZero)));
}

#[test]
fn leslie_stress_is_linear_and_vanishes_at_rest() {
    let p = params();
    let coeffs = leslie_coefficients_at_eta(&p, 8.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 3;
    let omega = random_unit(&mut rng, n);
    let zero = FlowPoint::new(DMatrix::zeros(n, n), DMatrix::zeros(n, n), omega.clone(), DVector::zeros(n), DVector::zeros(n)).unwrap();
    assert_eq!(leslie_stress(&coeffs, coeffs.rho, &zero).unwrap().amax(), 0.0);
    let p_perp = projector_perp(&omega);
    let make = |e: DMatrix<f64>, nv: DVector<f64>| FlowPoint::new(e, DMatrix::zeros(n, n), omega.clone(), nv, DVector::zeros(n)).unwrap();
    let (e1, e2) = (random_strain(&mut rng, n), random_strain(&mut rng, n));
    let n1 = &p_perp * DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let n2 = &p_perp * DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let (a, b) = (1.7, -0.4);
    let s1 = leslie_stress(&coeffs, coeffs.rho, &make(e1.clone(), n1.clone())).unwrap();
    let s2 = leslie_stress(&coeffs, coeffs.rho, &make(e2.clone(), n2.clone())).unwrap();
    let s12 = leslie_stress(&coeffs, coeffs.rho, &make(&e1 * a + &e2 * b, &n1 * a + &n2 * b)).unwrap();
    assert!((s12 - (s1 * a + s2 * b)).amax() < 1e-13);
}

#[test]
fn flow_point_rejects_broken_invariants() {
    let n = 2;
    let omega = DVector::from_vec(vec![1.0, 0.0]);
    let e_bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    assert!(FlowPoint::new(e_bad, DMatrix::zeros(n, n), omega.clone(), DVector::zeros(n), DVector::zeros(n)).is_err());
    let n_bad = DVector::from_vec(vec![0.5, 0.0]);
    assert!(FlowPoint::new(DMatrix::zeros(n, n), DMatrix::zeros(n, n), omega, n_bad, DVector::zeros(n)).is_err());
}

#[test]
fn dissipation_vanishes_at_rest_and_is_even() {
    let p = params();
    let coeffs = leslie_coefficients_at_eta(&p, 8.0).unwrap();
    let n = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let omega = random_unit(&mut rng, n);
    let rest = FlowPoint::from_molecular_field(DMatrix::zeros(n, n), DMatrix::zeros(n, n), omega.clone(), DVector::zeros(n), &coeffs).unwrap();
    assert_eq!(dissipation_density(&coeffs, coeffs.rho, &rest).unwrap().value, 0.0);
    let e = random_strain(&mut rng, n);
    let h = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let w = random_spin(&mut rng, n);
    let plus = FlowPoint::from_molecular_field(e.clone(), w.clone(), omega.clone(), h.clone(), &coeffs).unwrap();
    let minus = FlowPoint::from_molecular_field(-e, -w, omega, -h, &coeffs).unwrap();
    let dp = dissipation_density(&coeffs, coeffs.rho, &plus).unwrap().value;
    let dm = dissipation_density(&coeffs, coeffs.rho, &minus).unwrap().value;
    assert_relative_eq!(dp, dm, epsilon = 1e-13);
}

#[test]
fn dissipation_is_non_negative_on_random_samples() {
    let p = ModelParams::new(3, 10.0, 1.0, 0.5, 0.1).unwrap();
    let n = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for eta in [2.0, 6.0, 20.0] {
        let coeffs = leslie_coefficients_at_eta(&p, eta).unwrap();
        let mut first = true;
        for _ in 0..10_000 {
            let fp = FlowPoint::from_molecular_field(
                random_strain(&mut rng, n),
                random_spin(&mut rng, n),
                random_unit(&mut rng, n),
                DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)),
                &coeffs,
            )
            .unwrap();
            let d = dissipation_density(&coeffs, coeffs.rho, &fp).unwrap();
            assert!(d.value >= -1e-12, "eta = {eta}: {}", d.value);
            if first {
                assert!(d.positive_scan);
                first = false;
            }
        }
    }
}

#[test]
fn strain_form_minimum_bounds_random_strains() {
    let p = ModelParams::new(3, 10.0, 0.9, 0.2, 0.1).unwrap();
    let coeffs = leslie_coefficients_at_eta(&p, 5.0).unwrap();
    let n = 3;
    let omega = DVector::from_vec(vec![1.0, 0.0, 0.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut lowest = f64::INFINITY;
    let mut reported = f64::NAN;
    for _ in 0..20_000 {
        let e = random_strain(&mut rng, n);
        let e = &e / e.norm();
        let fp = FlowPoint::new(e, DMatrix::zeros(n, n), omega.clone(), DVector::zeros(n), DVector::zeros(n)).unwrap();
        let d = dissipation_density(&coeffs, 1.0, &fp).unwrap();
        reported = d.min_over_unit_strain;
        assert!(d.value >= reported - 1e-13);
        lowest = lowest.min(d.value);
    }
    assert!(lowest - reported < 1e-2 * reported.abs().max(1e-3), "{lowest} vs {reported}");
}

#[test]
fn ericksen_stress_of_constant_fields_is_zero() {
    let p = params();
    let n = 3;
    let jet = FieldJet {
        rho: 1.0,
        eta: 5.0,
        grad_rho: DVector::zeros(n),
        grad_eta: DVector::zeros(n),
        omega: DVector::from_vec(vec![0.0, 0.0, 1.0]),
        grad_omega: DMatrix::zeros(n, n),
        lap_eta_omega: DVector::zeros(n),
    };
    assert_eq!(ericksen_stress(&p, &jet).unwrap().amax(), 0.0);
    assert_eq!(ericksen_stress_on_branch(&p, &jet).unwrap().amax(), 0.0);
    assert_eq!(molecular_field(&p, &jet).unwrap().amax(), 0.0);
}

#[test]
fn ericksen_stress_at_uniform_density() {
    let p = params();
    let n = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let eta = 7.0;
    let mut jet = random_jet(&mut rng, n, eta, rho_of_eta(eta, &p).unwrap(), DVector::zeros(n));
    jet.grad_eta = DVector::zeros(n);
    let k = 2.0 * p.beta * eta * eta / p.alpha;
    let expected = &jet.grad_omega * jet.grad_omega.transpose() * (-k);
    assert!((ericksen_stress(&p, &jet).unwrap() - &expected).amax() < 1e-12);
    assert!((ericksen_stress_on_branch(&p, &jet).unwrap() - &expected).amax() < 1e-12);
}

#[test]
fn on_branch_ericksen_stress_matches_the_general_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (n, alpha, eta) in [(2usize, 4.0, 3.0), (3, 10.0, 6.0), (4, 20.0, 12.0)] {
        let p = ModelParams::new(n, alpha, 1.0, 0.5, 0.3).unwrap();
        let rho = rho_of_eta(eta, &p).unwrap();
        let (s, sp) = (s2(eta, n).unwrap(), s2_prime(eta, n).unwrap());
        // ρ = η/(αS₂) on the branch
        let drho_deta = (s - eta * sp) / (alpha * s * s);
        let mut jet = random_jet(&mut rng, n, eta, rho, DVector::zeros(n));
        jet.grad_rho = &jet.grad_eta * drho_deta;
        let general = ericksen_stress(&p, &jet).unwrap();
        let branch = ericksen_stress_on_branch(&p, &jet).unwrap();
        let scale = general.amax().max(1.0);
        assert!((general - branch).amax() < 1e-12 * scale, "n = {n}");
    }
}

#[test]
fn molecular_field_on_branch() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p = params();
    let eta = 5.5;
    let rho = rho_of_eta(eta, &p).unwrap();
    let jet = random_jet(&mut rng, 3, eta, rho, DVector::zeros(3));
    let h = molecular_field(&p, &jet).unwrap();
    let expected = &jet.lap_eta_omega * (2.0 * p.beta / p.alpha * eta);
    assert!((h * rho - expected).amax() < 1e-12);
}

fn twisted_field(p: &ModelParams, rho: impl Fn(f64) -> f64, m: usize, length: f64) -> PeriodicField1D {
    let xs: Vec<f64> = (0..m).map(|i| length * i as f64 / m as f64).collect();
    let wave = 2.0 * PI / length;
    PeriodicField1D {
        length,
        rho: xs.iter().map(|&x| rho(x)).collect(),
        omega: xs
            .iter()
            .map(|&x| {
                let mut v = DVector::zeros(p.n);
                v[0] = (wave * x).cos();
                v[1] = (wave * x).sin();
                v
            })
            .collect(),
    }
}

#[test]
fn franck_energy_of_a_uniform_twist() {
    let p = params();
    let eta = 6.0;
    let rho = rho_of_eta(eta, &p).unwrap();
    let length = 3.0;
    let field = twisted_field(&p, |_| rho, 64, length);
    let fe = franck_energy(&p, &field).unwrap();
    let wave = 2.0 * PI / length;
    let expected = (p.beta / p.alpha) * eta * eta * wave * wave * length;
    assert!((fe.total - expected).abs() < 1e-8 * expected);
    assert!(fe.rho_part.abs() < 1e-20 && fe.eta_part.abs() < 1e-20);
    assert!((franck_energy_on_branch(&p, &field).unwrap() - expected).abs() < 1e-8 * expected);
}

#[test]
fn franck_energy_forms_agree_with_varying_density() {
    let p = params();
    let rho0 = rho_of_eta(8.0, &p).unwrap();
    let length = 2.0;
    let field = twisted_field(&p, |x| rho0 * (1.0 + 0.05 * (2.0 * PI * x / length).sin()), 128, length);
    let fe = franck_energy(&p, &field).unwrap();
    let alt = franck_energy_on_branch(&p, &field).unwrap();
    assert!((fe.total - alt).abs() < 1e-8 * fe.total.abs().max(1.0), "{} vs {alt}", fe.total);
    assert!(fe.rho_part < 0.0 && fe.eta_part < 0.0);
}

#[test]
fn director_equation_in_shear() {
    let p = ModelParams::new(2, 4.0, 1.0, 0.5, 0.1).unwrap();
    let coeffs = leslie_coefficients_at_eta(&p, 3.0).unwrap();
    let rate = 1.3;
    let (e, w) = simple_shear(rate);
    for i in 0..24 {
        let theta = PI * i as f64 / 24.0;
        let omega = DVector::from_vec(vec![theta.cos(), theta.sin()]);
        let rhs = director_rhs(&coeffs, &p, &omega, &e, &w, None).unwrap();
        assert!(rhs.dot(&omega).abs() < 1e-15);
        let theta_dot = -theta.sin() * rhs[0] + theta.cos() * rhs[1];
        let expected = rate / 2.0 * (coeffs.c * (2.0 * theta).cos() - 1.0);
        assert!((theta_dot - expected).abs() < 1e-14);
        let spin_only = director_rhs(&coeffs, &p, &omega, &DMatrix::zeros(2, 2), &w, None).unwrap();
        assert!((spin_only + &w * &omega).amax() < 1e-15);
    }
}

#[test]
fn director_equation_stays_tangent_in_three_dimensions() {
    let p = params();
    let coeffs = leslie_coefficients_at_eta(&p, 6.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let omega = random_unit(&mut rng, 3);
        let lap = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
        let rhs = director_rhs(&coeffs, &p, &omega, &random_strain(&mut rng, 3), &random_spin(&mut rng, 3), Some(&lap)).unwrap();
        assert!(rhs.dot(&omega).abs() < 1e-14);
    }
}

#[test]
fn shear_response_predictions() {
    match shear_response(2.0, 1.0).unwrap() {
        ShearResponse::Aligning { angle } => assert_relative_eq!(angle, PI / 6.0, epsilon = 1e-15),
        other => panic!("{other:?}"),
    }
    match shear_response(-2.0, 1.0).unwrap() {
        ShearResponse::Aligning { angle } => assert_relative_eq!(angle, -PI / 3.0, epsilon = 1e-15),
        other => panic!("{other:?}"),
    }
    match shear_response(0.5, 2.0).unwrap() {
        ShearResponse::Tumbling { period } => assert_relative_eq!(period, PI / 0.75f64.sqrt(), epsilon = 1e-14),
        other => panic!("{other:?}"),
    }
    assert!(shear_response(0.5, 0.0).is_err());
}

#[test]
fn spectral_derivative_of_a_sine() {
    let m = 32;
    let length = 5.0;
    let xs: Vec<f64> = (0..m).map(|i| length * i as f64 / m as f64).collect();
    let k = 2.0 * PI * 3.0 / length;
    let v: Vec<f64> = xs.iter().map(|x| (k * x).sin()).collect();
    let d = spectral_derivative(&v, length);
    for (x, dv) in xs.iter().zip(&d) {
        assert!((dv - k * (k * x).cos()).abs() < 1e-12);
    }
}
