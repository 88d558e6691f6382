use hoairy::idpii_solver::SolverConfig;
use hoairy::mkdv_check::*;
use hoairy::weights::make_fermi;
use num_rational::Rational64;
use proptest::prelude::*;

#[test]
fn residual_is_second_order_in_tau() {
    let w = make_fermi(1.0).unwrap();
    for n in [1u32, 2] {
        let r = residual_order(n, &w, 1.0, 2e-2, 0.0, 0.0, &SolverConfig::for_order(n)).unwrap();
        println!("n={n} r({})={:.3e} r({})={:.3e} order={:.3}", r.coarse.delta_tau, r.coarse.at_x, r.fine.delta_tau, r.fine.at_x, r.order);
        assert!(r.order >= 1.9);
        assert!(r.fine.at_x.abs() < 1e-4);
    }
}

#[test]
fn grid_doubling_leaves_the_frame() {
    let w = make_fermi(1.0).unwrap();
    let coarse = SolverConfig::default();
    let fine = SolverConfig { grid_m: 2 * coarse.grid_m, ..coarse };
    let v = |cfg: &SolverConfig| {
        let g = cfg.grid(&w).unwrap();
        frame_at(1, 1.0, &g, 1.2, 0.0, cfg).unwrap().value_at(0, 0.0).unwrap()
    };
    let (a, b) = (v(&coarse), v(&fine));
    println!("v(0|0): {a:.12} -> {b:.12}");
    assert!((a - b).abs() < 1e-6);
}

#[test]
fn fermi_routes_agree() {
    let f = fermi_distribution(1, 1.0, 0.0).unwrap();
    println!("{f:?}");
    assert!(f.diff.abs() < 1e-4);
}

#[test]
fn fermi_distribution_increases() {
    let mut prev = 0.0;
    for t in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let f = fermi_distribution(1, 1.0, t).unwrap();
        println!("t={t} F={:.12} via mKdV {:.12}", f.det, f.via_mkdv);
        assert!(f.det > prev && f.det <= 1.0);
        assert!(f.diff.abs() < 1e-4);
        prev = f.det;
    }
}

#[test]
fn exponents_for_the_first_members() {
    assert_eq!(scaling_exponents(1).unwrap(), (Rational64::new(1, 6), Rational64::new(1, 3)));
    assert_eq!(scaling_exponents(2).unwrap(), (Rational64::new(2, 15), Rational64::new(8, 15)));
}

proptest! {
    #[test]
    fn exponents_sum(n in 1u32..500) {
        let (e, f) = scaling_exponents(n).unwrap();
        prop_assert_eq!(e + f, Rational64::new(n as i64, n as i64 + 1));
        prop_assert!(e > Rational64::from_integer(0) && f > e || n == 1 && f == e * 2);
    }

    #[test]
    fn time_variable_matches_tau(n in 1u32..6, tau in 0.1f64..3.0) {
        let expected = tau.powi(2 * n as i32 + 1) / (2 * n + 1) as f64;
        prop_assert!((t_odd(n, tau) - expected).abs() <= 1e-14 * expected.max(1.0));
    }
}
