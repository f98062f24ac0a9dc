use bessel_hardy::specfun::{bessel_i, bessel_i_scaled, BesselOrder};
use proptest::prelude::*;
use statrs::function::gamma::ln_gamma;

/// Power series `Σ (x/2)^{2k+τ} / (k! Γ(k+τ+1))` summed in logs.
fn series(tau: f64, x: f64) -> f64 {
    let h = (0.5 * x).ln();
    (0..200)
        .map(|k| {
            let k = k as f64;
            ((2.0 * k + tau) * h - ln_gamma(k + 1.0) - ln_gamma(k + tau + 1.0)).exp()
        })
        .sum()
}

fn order(tau: f64) -> BesselOrder {
    BesselOrder::new(tau).unwrap()
}

#[test]
fn matches_series_on_moderate_arguments() {
    for &tau in &[-0.75, -0.5, 0.0, 0.3, 1.0, 2.5, 7.0] {
        for &x in &[1e-3, 0.1, 0.9, 3.0, 11.0, 25.0] {
            let (v, s) = (bessel_i(order(tau), x).unwrap(), series(tau, x));
            assert!((v - s).abs() <= 1e-11 * s.abs(), "tau={tau} x={x}: {v} vs {s}");
        }
    }
}

#[test]
fn half_integer_orders_are_hyperbolic() {
    for &x in &[0.01, 0.5, 4.0, 40.0, 300.0] {
        let c = (2.0 / (std::f64::consts::PI * x)).sqrt();
        let sinh = 0.5 * (1.0 - (-2.0 * x).exp());
        let cosh = 0.5 * (1.0 + (-2.0 * x).exp());
        let a = bessel_i_scaled(order(0.5), x).unwrap();
        let b = bessel_i_scaled(order(-0.5), x).unwrap();
        assert!((a - c * sinh).abs() <= 1e-13 * c * sinh, "x={x}");
        assert!((b - c * cosh).abs() <= 1e-13 * c * cosh, "x={x}");
    }
}

#[test]
fn negative_orders_and_arguments_are_rejected() {
    assert!(BesselOrder::new(-1.0).is_err());
    assert!(bessel_i(order(0.0), -1.0).is_err());
    assert!(bessel_i(order(0.0), 1e4).is_err());
    assert!(bessel_i_scaled(order(0.0), 1e4).unwrap() > 0.0);
}

proptest! {
    #[test]
    fn three_term_recurrence(tau in 0.05f64..6.0, x in 1e-2f64..80.0) {
        // I_{τ−1} − I_{τ+1} = (2τ/x) I_τ, on scaled values
        let lo = bessel_i_scaled(order(tau - 1.0), x).unwrap();
        let hi = bessel_i_scaled(order(tau + 1.0), x).unwrap();
        let mid = bessel_i_scaled(order(tau), x).unwrap();
        let lhs = lo - hi;
        let rhs = 2.0 * tau / x * mid;
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lo.abs().max(rhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn increasing_in_x_and_decreasing_in_order(tau in 0.0f64..5.0, x in 1e-2f64..50.0) {
        let a = bessel_i(order(tau), x).unwrap();
        prop_assert!(bessel_i(order(tau), 1.1 * x).unwrap() > a);
        prop_assert!(bessel_i(order(tau + 0.5), x).unwrap() < a);
    }
}
