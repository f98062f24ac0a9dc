use bessel_hardy::atoms::{localize_and_decompose, mean_split, validate_atom, AtomKind};
use bessel_hardy::covering::{dyadic_covering_1d, dyadic_power, Window};
use bessel_hardy::func::{Cell, CellFunction};
use bessel_hardy::measure::NuVector;
use proptest::prelude::*;

fn step(values: &[f64], a: f64) -> CellFunction {
    let h = a / values.len() as f64 * 4.0;
    let cells = values.iter().enumerate().map(|(i, &v)| Cell::new(vec![a + i as f64 * h], vec![a + (i + 1) as f64 * h], v)).collect();
    CellFunction::new(1, cells).unwrap()
}

#[test]
fn single_cube_gives_one_local_atom() {
    let nu = NuVector::classical(&[0.5]).unwrap();
    let f = CellFunction::new(1, vec![Cell::new(vec![1.0], vec![2.0], 2.0)]).unwrap();
    let d = localize_and_decompose(&f, &dyadic_covering_1d(), &nu, 2, &Window::new(-3, 3).unwrap()).unwrap();
    let local: Vec<_> = d.terms.iter().filter(|t| t.atom.kind == AtomKind::Local).collect();
    assert!(!local.is_empty());
    for x in [1.1, 1.5, 1.9] {
        assert!((d.evaluate(&[x]) - 2.0).abs() < 1e-12);
    }
}

#[test]
fn support_outside_window_is_rejected() {
    let nu = NuVector::classical(&[0.0]).unwrap();
    let f = CellFunction::new(1, vec![Cell::new(vec![64.0], vec![65.0], 1.0)]).unwrap();
    assert!(localize_and_decompose(&f, &dyadic_covering_1d(), &nu, 1, &Window::new(-2, 2).unwrap()).is_err());
}

#[test]
fn mean_split_needs_a_tiling() {
    let nu = NuVector::classical(&[0.0]).unwrap();
    let q = dyadic_covering_1d().element(&[0]).unwrap().cube;
    let half = CellFunction::new(1, vec![Cell::new(vec![1.0], vec![1.5], 1.0)]).unwrap();
    assert!(mean_split(&half, &q, 1.0625, &nu).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn decompositions_reconstruct_and_validate(
        values in prop::collection::vec(-3.0f64..3.0, 2..12),
        level in -2i32..3,
        nu in -0.9f64..2.0,
        depth in 0u32..3,
    ) {
        let cov = dyadic_covering_1d();
        let nus = NuVector::classical(&[nu]).unwrap();
        let f = step(&values, 2f64.powi(level));
        let d = localize_and_decompose(&f, &cov, &nus, depth, &Window::new(-4, 6).unwrap()).unwrap();
        let scale = f.sup_abs().max(1e-300);
        for c in &f.cells {
            prop_assert!((d.evaluate(&c.center()) - c.value).abs() <= 1e-12 * scale);
        }
        for t in &d.terms {
            prop_assert!(validate_atom(&t.atom, &cov, &nus).valid);
        }
    }

    #[test]
    fn mean_split_contract(values in prop::collection::vec(-2.0f64..2.0, 16), a in 0.2f64..1.0, b in 0.0f64..1.5) {
        let cov = dyadic_power(2);
        let nus = NuVector::classical(&[a - 0.5, b]).unwrap();
        let q = cov.locate(&[1.5, 1.5]).unwrap().cube;
        let mut cells = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                let lo = vec![q.lower()[0] + 0.25 * i as f64, q.lower()[1] + 0.25 * j as f64];
                let hi = vec![lo[0] + 0.25, lo[1] + 0.25];
                cells.push(Cell::new(lo, hi, values[4 * i + j]));
            }
        }
        let f = CellFunction::new(2, cells).unwrap();
        let eff = nus.effective();
        let (l0, g) = mean_split(&f, &q, cov.kappa(), &nus).unwrap();
        let l1 = f.l1(&eff);
        prop_assert!(l0.abs() <= l1 * (1.0 + 1e-12));
        prop_assert!(g.integral(&eff).abs() <= 1e-12 * l1.max(1e-300));
    }
}
