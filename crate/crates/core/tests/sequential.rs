use bessel_hardy::config::Config;
use bessel_hardy::covering::{check_covering, dyadic_power, Window};
use bessel_hardy::measure::Flavor;
use bessel_hardy::par;
use bessel_hardy::verify::run_condition;

// one test so the global switch is not raced by another test in this binary
#[test]
fn sequential_and_parallel_paths_agree_bitwise() {
    let cfg = Config { nu: vec![1.0], flavors: vec![Flavor::Exotic], covering: "dyadic".into(), window: [-1, 1], ..Config::default() };
    let cov = dyadic_power(2);
    let w = Window::new(-2, 2).unwrap();

    par::set_parallel(false);
    let a = serde_json::to_string(&run_condition(&cfg, "A2").unwrap()).unwrap();
    let c = check_covering(&cov, &w, 200, 200, 3).unwrap();
    par::set_parallel(true);
    let b = serde_json::to_string(&run_condition(&cfg, "A2").unwrap()).unwrap();
    let d = check_covering(&cov, &w, 200, 200, 3).unwrap();

    assert_eq!(a, b);
    assert_eq!(c, d);
}
