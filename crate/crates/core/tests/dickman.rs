use charsum::dickman::{xi, RhoEvaluator};
use charsum::numeric::{integrate, EULER_GAMMA};
use proptest::prelude::*;

fn rho() -> &'static RhoEvaluator {
    RhoEvaluator::shared()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn delay_equation_residual(u in 1.0f64..399.0) {
        let r = rho();
        let residual = u * r.rho_deriv(u).unwrap() + r.rho(u - 1.0).unwrap();
        prop_assert!(residual.abs() <= 1e-9, "u={u}: {residual:e}");
    }
}

proptest! {
    #[test]
    fn one_on_unit_interval(u in 0.0f64..=1.0) {
        prop_assert_eq!(rho().rho(u).unwrap(), 1.0);
    }

    #[test]
    fn strictly_decreasing(u in 1.0f64..399.0, step in 1e-3f64..1.0) {
        let r = rho();
        prop_assert!(r.ln_rho(u + step).unwrap() < r.ln_rho(u).unwrap());
    }

    #[test]
    fn xi_is_positive_root(u in 1.01f64..1e6) {
        let x = xi(u).unwrap();
        prop_assert!(x > 0.0);
        let residual = x.exp_m1() - u * x;
        prop_assert!(residual.abs() <= 1e-10 * (1.0 + u * x), "u={u}: {residual:e}");
    }
}

#[test]
fn integral_is_e_gamma() {
    // independent of the piecewise integrals: quadrature of point values
    let r = rho();
    let mut total = 1.0;
    for k in 1..60 {
        let q = integrate(|u| r.rho(u).unwrap(), k as f64, k as f64 + 1.0, 1e-16, 1e-14);
        total += q.value;
    }
    assert!((total - EULER_GAMMA.exp()).abs() <= 1e-8, "{total}");
    let analytic = 1.0 + r.rho_tail_integral(1.0).unwrap();
    assert!((analytic - EULER_GAMMA.exp()).abs() <= 1e-8, "{analytic}");
}

#[test]
fn rho_two() {
    assert!((rho().rho(2.0).unwrap() - (1.0 - 2f64.ln())).abs() <= 1e-10);
}

#[test]
fn below_u_to_minus_u_from_six() {
    let r = rho();
    let mut u = 6.0;
    while u <= 399.0 {
        assert!(r.ln_rho(u).unwrap() <= -u * u.ln(), "u={u}");
        u += 0.25;
    }
}

#[test]
fn above_u_to_minus_u_for_small_u() {
    // the implied constant exceeds 1 below u ≈ 6
    let r = rho();
    for &u in &[3.0, 4.0, 5.0] {
        assert!(r.ln_rho(u).unwrap() > -u * u.ln(), "u={u}");
    }
}

#[test]
fn knots_are_continuous() {
    let r = rho();
    for k in 2..399 {
        let k = k as f64;
        let left = r.ln_rho(k - 1e-12).unwrap();
        let right = r.ln_rho(k + 1e-12).unwrap();
        assert!((left - right).abs() < 1e-9, "knot {k}");
    }
}
