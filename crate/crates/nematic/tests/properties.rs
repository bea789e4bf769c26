use nalgebra::{DMatrix, DVector};
use nematic::equilibria::{eta_of_rho, rho_of_eta, s2, ModelParams};
use nematic::gci::{solve_h, DEFAULT_BASIS};
use nematic::kinetic::{collision, transport, OrientationState};
use nematic::leslie::{assemble_leslie, director_rhs, leslie_stress, FlowPoint};
use nematic::tensor::projector_perp;
use num_complex::Complex64;
use proptest::prelude::*;

fn unit(v: &[f64]) -> Option<DVector<f64>> {
    let d = DVector::from_column_slice(v);
    let len = d.norm();
    (len > 0.1).then(|| d / len)
}

fn strain(raw: &[f64], n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_column_slice(n, n, &raw[..n * n]);
    let mut e = (&m + m.transpose()) * 0.5;
    let tr = e.trace() / n as f64;
    for i in 0..n {
        e[(i, i)] -= tr;
    }
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parodi_relation_holds(
        n in 2usize..6,
        lambda in -1.0f64..1.0,
        zeta in 0.0f64..2.0,
        s2v in 0.01f64..0.99,
        s4v in 0.0f64..0.99,
        c in 0.05f64..5.0,
    ) {
        let p = ModelParams::new(n, 10.0, lambda, zeta, 0.1).unwrap();
        let l = assemble_leslie(&p, 1.0, 3.0, s2v, s4v, c);
        let scale = 1.0 + l.alpha.iter().map(|a| a.abs()).fold(0.0, f64::max);
        prop_assert!(l.parodi_defect().abs() < 1e-14 * scale);
    }

    #[test]
    fn order_parameter_is_monotone(n in 2usize..6, a in 0.0f64..50.0, d in 1e-3f64..5.0) {
        prop_assert!(s2(a + d, n).unwrap() > s2(a, n).unwrap());
    }

    #[test]
    fn gci_profile_is_odd(n in 2usize..5, eta in 0.1f64..30.0, r in 0.0f64..1.0) {
        let h = solve_h(eta, n, DEFAULT_BASIS).unwrap();
        prop_assert!((h.h(r) + h.h(-r)).abs() < 1e-14);
        prop_assert!(h.h(r) <= 1e-8);
    }

    #[test]
    fn branch_round_trip_in_two_dimensions(alpha in 2.0f64..20.0, excess in 0.05f64..3.0) {
        let p = ModelParams::new(2, alpha, 1.0, 0.5, 0.1).unwrap();
        let rho = 4.0 / alpha * (1.0 + excess);
        let eta = eta_of_rho(rho, &p).unwrap();
        prop_assert!((rho_of_eta(eta, &p).unwrap() - rho).abs() < 1e-9 * rho);
    }

    #[test]
    fn director_rate_is_tangent(
        raw in proptest::collection::vec(-1.0f64..1.0, 9),
        dir in proptest::collection::vec(-1.0f64..1.0, 3),
        spin in proptest::collection::vec(-1.0f64..1.0, 9),
    ) {
        let Some(omega) = unit(&dir) else { return Ok(()); };
        let p = ModelParams::new(3, 10.0, 0.8, 0.5, 0.1).unwrap();
        let l = assemble_leslie(&p, 1.0, 5.0, 0.7, 0.4, 0.9);
        let e = strain(&raw, 3);
        let m = DMatrix::from_column_slice(3, 3, &spin);
        let w = (&m - m.transpose()) * 0.5;
        let rhs = director_rhs(&l, &p, &omega, &e, &w, None).unwrap();
        prop_assert!(rhs.dot(&omega).abs() < 1e-14);
    }

    #[test]
    fn leslie_stress_is_homogeneous(
        raw in proptest::collection::vec(-1.0f64..1.0, 9),
        dir in proptest::collection::vec(-1.0f64..1.0, 3),
        nv in proptest::collection::vec(-1.0f64..1.0, 3),
        t in -3.0f64..3.0,
    ) {
        let Some(omega) = unit(&dir) else { return Ok(()); };
        let p = ModelParams::new(3, 10.0, 0.8, 0.5, 0.1).unwrap();
        let l = assemble_leslie(&p, 1.3, 5.0, 0.7, 0.4, 0.9);
        let e = strain(&raw, 3);
        let n_vec = projector_perp(&omega) * DVector::from_column_slice(&nv);
        let zero = DMatrix::zeros(3, 3);
        let fp = FlowPoint::new(e.clone(), zero.clone(), omega.clone(), n_vec.clone(), DVector::zeros(3)).unwrap();
        let ft = FlowPoint::new(e * t, zero, omega, n_vec * t, DVector::zeros(3)).unwrap();
        let a = leslie_stress(&l, 1.3, &fp).unwrap() * t;
        let b = leslie_stress(&l, 1.3, &ft).unwrap();
        prop_assert!((a - b).amax() < 1e-13 * (1.0 + t.abs()));
    }

    #[test]
    fn kinetic_right_hand_side_conserves_mass(
        seed in 0u64..10_000,
        alpha in 0.0f64..20.0,
        rate in -2.0f64..2.0,
        lambda in -1.0f64..1.0,
    ) {
        let s = OrientationState::random(1.0, 12, seed).unwrap();
        prop_assert_eq!(collision(&s, alpha)[0], Complex64::new(0.0, 0.0));
        let t = transport(&s, &nematic::kinetic::shear_gradient(rate), lambda).unwrap();
        prop_assert_eq!(t[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn collision_commutes_with_rotation(seed in 0u64..10_000, alpha in 0.0f64..20.0, angle in -3.0f64..3.0) {
        let s = OrientationState::random(1.0, 10, seed).unwrap();
        // f(φ - a) has modes f̂_{2m} e^{-i2ma}
        let rot = |c: &[Complex64]| -> Vec<Complex64> {
            c.iter().enumerate().map(|(m, z)| z * Complex64::from_polar(1.0, -2.0 * m as f64 * angle)).collect()
        };
        let rs = OrientationState::new(rot(s.coeffs()), 0.0).unwrap();
        let a = collision(&rs, alpha);
        let b = rot(&collision(&s, alpha));
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12);
    }
}
