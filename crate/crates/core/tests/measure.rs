use bessel_hardy::measure::{
    measure_ball_comparable, measure_ball_exact, measure_box, measure_interval, Interval, NuVector, Flavor,
};
use proptest::prelude::*;

fn power(nu: f64, a: f64, b: f64) -> f64 {
    let p = 2.0 * nu + 2.0;
    if a == 0.0 {
        return b.powf(p) / p;
    }
    a.powf(p) * (p * ((b - a) / a).ln_1p()).exp_m1() / p
}

#[test]
fn intervals_integrate_the_power_weight() {
    for &nu in &[-0.9, -0.5, 0.0, 0.5, 3.0] {
        for &(a, b) in &[(0.0, 1.0), (1.0, 2.0), (0.25, 7.0)] {
            let m = measure_interval(nu, &Interval::new(a, b).unwrap()).unwrap();
            let e = power(nu, a, b);
            assert!((m - e).abs() <= 1e-13 * e, "nu={nu} [{a},{b}]");
        }
    }
}

#[test]
fn intervals_at_zero_are_infinite_for_non_integrable_weights() {
    let m = measure_interval(-1.5, &Interval::new(0.0, 1.0).unwrap());
    assert!(m.map_or(true, |v| v.is_infinite()));
    assert!(Interval::new(2.0, 1.0).is_err());
}

#[test]
fn boxes_are_products() {
    let m = measure_box(&[0.0, 1.0], &[1.0, 2.0], &[3.0, 4.0]);
    assert!((m - power(0.0, 1.0, 3.0) * power(1.0, 2.0, 4.0)).abs() < 1e-12);
}

#[test]
fn exotic_axes_use_the_opposite_order() {
    let v = NuVector::from_parts(&[0.5, 1.0], &[Flavor::Classical, Flavor::Exotic]).unwrap();
    assert_eq!(v.effective(), vec![0.5, -1.0]);
    assert!(NuVector::from_parts(&[0.5], &[Flavor::Exotic, Flavor::Classical]).is_err());
}

proptest! {
    #[test]
    fn ball_measure_is_comparable(nu in -0.9f64..3.0, lx in -3.0f64..3.0, lr in -3.0f64..3.0) {
        let (x, r) = (10f64.powf(lx), 10f64.powf(lr));
        let e = measure_ball_exact(nu, x, r).unwrap();
        let c = measure_ball_comparable(nu, x, r).unwrap();
        let ratio = e / c;
        prop_assert!(ratio > 1e-2 && ratio < 1e2, "ratio {ratio}");
        let lo = (x - r).max(0.0);
        prop_assert!((e - power(nu, lo, x + r)).abs() <= 1e-12 * e);
    }
}
