//! Bessel heat kernels: classical `W^cls`, exotic `W^exo`, the conjugated kernel
//! `K_t`, their tensor products, and Gaussian envelopes.
//!
//! Every kernel is evaluated as
//! `(2t)^{-1} (4t)^{-ν} · e^{-z} I_ν(z)/(z/2)^ν · exp(−(x−y)²/4t)` with `z = xy/2t`,
//! so the exponential growth of `I_ν` never appears.

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::measure::{measure_ball_box, NuAxis, NuVector};
use crate::specfun::bessel_i_reduced;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    ClassicalW,
    ExoticW,
    ConjugatedK,
}

/// One axis of a kernel. Exotic and conjugated axes store the positive order `ν_e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisKernel {
    pub nu: f64,
    pub branch: Branch,
}

impl AxisKernel {
    pub fn new(nu: f64, branch: Branch) -> Result<Self> {
        let ok = match branch {
            Branch::ClassicalW => nu > -1.0,
            Branch::ExoticW | Branch::ConjugatedK => nu > 0.0,
        };
        if ok && nu.is_finite() {
            Ok(AxisKernel { nu, branch })
        } else {
            Err(Error::domain(format!("order {nu} not admissible for {branch:?}")))
        }
    }

    pub fn classical(nu: f64) -> Result<Self> {
        Self::new(nu, Branch::ClassicalW)
    }

    pub fn conjugated(nu: f64) -> Result<Self> {
        Self::new(nu, Branch::ConjugatedK)
    }

    pub fn exotic(nu: f64) -> Result<Self> {
        Self::new(nu, Branch::ExoticW)
    }

    /// Exponent `ν` of the measure `μ_ν` the kernel integrates against.
    pub fn measure_nu(&self) -> f64 {
        match self.branch {
            Branch::ClassicalW | Branch::ConjugatedK => self.nu,
            Branch::ExoticW => -self.nu,
        }
    }

    /// Kernel value for positive `t, x, y`; no argument checks.
    #[inline]
    pub fn eval(&self, t: f64, x: f64, y: f64) -> f64 {
        let w = w_cls(self.nu, t, x, y);
        match self.branch {
            Branch::ClassicalW => w,
            Branch::ExoticW => (x * y).powf(2.0 * self.nu) * w,
            Branch::ConjugatedK => (y / x).powf(2.0 * self.nu) * w,
        }
    }

    pub fn label(&self) -> String {
        match self.branch {
            Branch::ClassicalW => format!("W({})", self.nu),
            Branch::ExoticW => format!("Wexo({})", self.nu),
            Branch::ConjugatedK => format!("K({})", self.nu),
        }
    }
}

#[inline]
fn w_cls(nu: f64, t: f64, x: f64, y: f64) -> f64 {
    let d = x - y;
    let g = (-d * d / (4.0 * t)).exp();
    if g == 0.0 {
        return 0.0;
    }
    let z = x * y / (2.0 * t);
    let pref = if nu == 0.0 { 1.0 } else { (4.0 * t).powf(-nu) };
    pref / (2.0 * t) * bessel_i_reduced(nu, z) * g
}

fn check_txy(t: f64, x: f64, y: f64) -> Result<()> {
    if t > 0.0 && x > 0.0 && y > 0.0 && t.is_finite() && x.is_finite() && y.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("kernel needs positive finite t, x, y; got t={t}, x={x}, y={y}")))
    }
}

/// `W^cls_{t,ν}(x, y) = (2t)^{-1} (xy)^{-ν} I_ν(xy/2t) e^{-(x²+y²)/4t}`.
pub fn w_classical_1d(nu: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    check_txy(t, x, y)?;
    Ok(AxisKernel::classical(nu)?.eval(t, x, y))
}

/// `W^exo_{t,−ν_e}(x, y) = (xy)^{2ν_e} W^cls_{t,ν_e}(x, y)`.
pub fn w_exotic_1d(nu_e: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    check_txy(t, x, y)?;
    Ok(AxisKernel::exotic(nu_e)?.eval(t, x, y))
}

/// `K_{t,ν}(x, y) = (2t)^{-1} y^ν x^{-3ν} I_ν(xy/2t) e^{-(x²+y²)/4t}`.
pub fn k_conjugated_1d(nu: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    check_txy(t, x, y)?;
    Ok(AxisKernel::conjugated(nu)?.eval(t, x, y))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub axes: Vec<AxisKernel>,
}

impl KernelSpec {
    pub fn new(axes: Vec<AxisKernel>) -> Self {
        KernelSpec { axes }
    }

    /// `W^cls ⊗ W^exo` for a multiparameter split into classical and exotic axes.
    pub fn semigroup(nu: &NuVector) -> Result<Self> {
        nu.axes
            .iter()
            .map(|a: &NuAxis| match a.flavor {
                crate::measure::Flavor::Classical => AxisKernel::classical(a.nu),
                crate::measure::Flavor::Exotic => AxisKernel::exotic(a.nu),
            })
            .collect::<Result<Vec<_>>>()
            .map(KernelSpec::new)
    }

    /// `W^cls ⊗ K`: exotic axes replaced by their conjugated kernels.
    pub fn conjugated(nu: &NuVector) -> Result<Self> {
        nu.axes
            .iter()
            .map(|a| match a.flavor {
                crate::measure::Flavor::Classical => AxisKernel::classical(a.nu),
                crate::measure::Flavor::Exotic => AxisKernel::conjugated(a.nu),
            })
            .collect::<Result<Vec<_>>>()
            .map(KernelSpec::new)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Effective measure exponents, one per axis.
    pub fn measure_nu(&self) -> Vec<f64> {
        self.axes.iter().map(AxisKernel::measure_nu).collect()
    }

    pub fn label(&self) -> String {
        self.axes.iter().map(AxisKernel::label).collect::<Vec<_>>().join("x")
    }

    #[inline]
    pub fn eval(&self, t: f64, x: &[f64], y: &[f64]) -> f64 {
        self.axes.iter().zip(x.iter().zip(y)).map(|(a, (&xi, &yi))| a.eval(t, xi, yi)).product()
    }
}

/// Product of the per-axis kernels.
pub fn kernel_product(spec: &KernelSpec, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(spec.dim(), x.len())?;
    check_dims(spec.dim(), y.len())?;
    for (&a, &b) in x.iter().zip(y) {
        check_txy(t, a, b)?;
    }
    Ok(spec.eval(t, x, y))
}

/// Constants `(C, c)` of `C μ(B(x, √t))^{-1} exp(−|x−y|²/(c t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianEnvelope {
    pub big_c: f64,
    pub little_c: f64,
}

impl GaussianEnvelope {
    pub fn new(big_c: f64, little_c: f64) -> Result<Self> {
        if big_c > 0.0 && little_c > 0.0 {
            Ok(GaussianEnvelope { big_c, little_c })
        } else {
            Err(Error::domain("envelope constants must be positive"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeValue {
    pub value: f64,
    /// Set when `μ(B(x, √t)) = ∞`; the value is then reported as 0.
    pub infinite_measure: bool,
}

/// Envelope with balls measured exactly as cubes `∏ [x_j − √t, x_j + √t]`.
pub fn gaussian_envelope(nu: &[f64], env: &GaussianEnvelope, t: f64, x: &[f64], y: &[f64]) -> Result<EnvelopeValue> {
    check_dims(nu.len(), x.len())?;
    check_dims(nu.len(), y.len())?;
    for (&a, &b) in x.iter().zip(y) {
        check_txy(t, a, b)?;
    }
    let m = measure_ball_box(nu, x, t.sqrt());
    if !m.is_finite() {
        return Ok(EnvelopeValue { value: 0.0, infinite_measure: true });
    }
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(EnvelopeValue { value: env.big_c / m * (-d2 / (env.little_c * t)).exp(), infinite_measure: false })
}

/// Fitted upper and lower Gaussian constants of a kernel over a log grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeFit {
    pub upper: GaussianEnvelope,
    pub lower: GaussianEnvelope,
    pub samples: usize,
}

/// Fit `C₂` for the given `c₂` and `C₁` for `c₁` over `t ∈ [10⁻³, 10³]`, `x, y ∈ [10⁻², 10²]`.
pub fn fit_envelope(spec: &KernelSpec, c_upper: f64, c_lower: f64, n: usize) -> Result<EnvelopeFit> {
    let d = spec.dim();
    let nu = spec.measure_nu();
    let grid = |lo: f64, hi: f64| -> Vec<f64> {
        (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1).max(1) as f64)).collect()
    };
    let ts = grid(1e-3, 1e3);
    let ps = grid(1e-2, 1e2);
    let unit_up = GaussianEnvelope::new(1.0, c_upper)?;
    let unit_lo = GaussianEnvelope::new(1.0, c_lower)?;
    let mut hi: f64 = 0.0;
    let mut lo = f64::INFINITY;
    let mut samples = 0;
    for &t in &ts {
        for i in 0..ps.len().pow(d as u32) {
            for j in 0..ps.len().pow(d as u32) {
                let x: Vec<f64> = (0..d).map(|k| ps[(i / ps.len().pow(k as u32)) % ps.len()]).collect();
                let y: Vec<f64> = (0..d).map(|k| ps[(j / ps.len().pow(k as u32)) % ps.len()]).collect();
                let k = spec.eval(t, &x, &y);
                let eu = gaussian_envelope(&nu, &unit_up, t, &x, &y)?;
                let el = gaussian_envelope(&nu, &unit_lo, t, &x, &y)?;
                if eu.infinite_measure || eu.value == 0.0 || el.value == 0.0 || k == 0.0 {
                    continue;
                }
                hi = hi.max(k / eu.value);
                lo = lo.min(k / el.value);
                samples += 1;
            }
        }
    }
    Ok(EnvelopeFit {
        upper: GaussianEnvelope { big_c: hi, little_c: c_upper },
        lower: GaussianEnvelope { big_c: lo, little_c: c_lower },
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{adaptive, adaptive_to_infinity};
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn integral_dy(k: &AxisKernel, t: f64, x: f64, g: impl Fn(f64) -> f64) -> f64 {
        let p = 2.0 * k.measure_nu() + 1.0;
        let f = |y: f64| k.eval(t, x, y) * y.powf(p) * g(y);
        let s = t.sqrt();
        let a = (x - 12.0 * s).max(0.0);
        let b = x + 12.0 * s;
        let mut total = 0.0;
        if a > 0.0 {
            total += adaptive(&f, 0.0, a, 1e-14, 1e-12, 400).value;
        }
        total += adaptive(&f, a, x, 1e-14, 1e-12, 400).value;
        total += adaptive(&f, x, b, 1e-14, 1e-12, 400).value;
        total += adaptive_to_infinity(&f, b, s, 1e-14, 1e-12).value;
        total
    }

    #[test]
    fn half_order_is_neumann_heat_kernel() {
        for &(t, x, y) in &[(0.1, 0.5, 0.7), (1.0, 2.0, 3.0), (10.0, 0.1, 4.0), (0.01, 5.0, 5.1)] {
            let want = (4.0 * std::f64::consts::PI * t).powf(-0.5)
                * ((-(x - y) * (x - y) / (4.0 * t)).exp() + (-(x + y) * (x + y) / (4.0 * t)).exp());
            assert!(rel(w_classical_1d(-0.5, t, x, y).unwrap(), want) < 1e-13);
        }
    }

    #[test]
    fn conservation() {
        for &nu in &[0.0, 0.5, 2.0] {
            for &t in &[0.1, 1.0, 10.0] {
                for &x in &[0.5, 1.0, 4.0] {
                    let k = AxisKernel::classical(nu).unwrap();
                    let m = integral_dy(&k, t, x, |_| 1.0);
                    assert!((m - 1.0).abs() < 1e-6, "nu={nu} t={t} x={x}: {m}");
                }
            }
        }
    }

    #[test]
    fn chapman_kolmogorov() {
        for &nu in &[0.0, 1.0] {
            for &(t, s, x, y) in &[(0.3, 0.7, 1.0, 1.5), (1.0, 2.0, 0.5, 3.0), (0.05, 0.1, 2.0, 2.2)] {
                for k in [AxisKernel::classical(nu).unwrap(), AxisKernel::conjugated(nu.max(0.5)).unwrap()] {
                    let lhs = integral_dy(&k, t, x, |z| k.eval(s, z, y));
                    let rhs = k.eval(t + s, x, y);
                    assert!(rel(lhs, rhs) < 1e-5, "{k:?} {lhs} {rhs}");
                }
            }
        }
    }

    #[test]
    fn exotic_and_conjugated_identities() {
        let w = w_classical_1d(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(w_exotic_1d(1.0, 1.0, 1.0, 1.0).unwrap(), w);
        assert_eq!(k_conjugated_1d(1.0, 0.3, 2.0, 2.0).unwrap(), w_classical_1d(1.0, 0.3, 2.0, 2.0).unwrap());
        assert!(w_classical_1d(0.0, 0.0, 1.0, 1.0).is_err());
        assert!(w_exotic_1d(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn product_kernel() {
        let spec = KernelSpec::new(vec![AxisKernel::classical(0.0).unwrap(), AxisKernel::classical(1.0).unwrap()]);
        let v = kernel_product(&spec, 0.5, &[1.0, 2.0], &[1.5, 0.5]).unwrap();
        let want = w_classical_1d(0.0, 0.5, 1.0, 1.5).unwrap() * w_classical_1d(1.0, 0.5, 2.0, 0.5).unwrap();
        assert!(rel(v, want) < 1e-15);
        let mixed = KernelSpec::new(vec![AxisKernel::classical(0.5).unwrap(), AxisKernel::conjugated(1.0).unwrap()]);
        let cls = KernelSpec::new(vec![AxisKernel::classical(0.5).unwrap(), AxisKernel::classical(1.0).unwrap()]);
        let x = [1.3, 0.7];
        assert!(rel(mixed.eval(0.2, &x, &x), cls.eval(0.2, &x, &x)) < 1e-15);
        assert!(kernel_product(&spec, 0.5, &[1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn product_conservation_2d() {
        let a = AxisKernel::classical(0.0).unwrap();
        let b = AxisKernel::classical(0.5).unwrap();
        let (t, x) = (0.7, [1.0, 2.0]);
        let m = integral_dy(&a, t, x[0], |_| 1.0) * integral_dy(&b, t, x[1], |_| 1.0);
        assert!((m - 1.0).abs() < 1e-5);
    }

    #[test]
    fn envelope_fit_and_monotone() {
        let spec = KernelSpec::new(vec![AxisKernel::classical(0.0).unwrap()]);
        let fit = fit_envelope(&spec, 8.0, 2.0, 15).unwrap();
        assert!(fit.upper.big_c.is_finite() && fit.lower.big_c > 0.0);
        let nu = [0.0];
        for &(t, x, y) in &[(0.01, 1.0, 1.2), (1.0, 0.1, 3.0), (100.0, 5.0, 0.2)] {
            let w = spec.eval(t, &[x], &[y]);
            assert!(w <= gaussian_envelope(&nu, &fit.upper, t, &[x], &[y]).unwrap().value * (1.0 + 1e-12));
            assert!(w >= gaussian_envelope(&nu, &fit.lower, t, &[x], &[y]).unwrap().value * (1.0 - 1e-12));
        }
        let env = GaussianEnvelope::new(1.0, 4.0).unwrap();
        let a = gaussian_envelope(&nu, &env, 1.0, &[1.0], &[1.5]).unwrap().value;
        let b = gaussian_envelope(&nu, &env, 1.0, &[1.0], &[2.5]).unwrap().value;
        assert!(a > b);
        let inf = gaussian_envelope(&[-2.0], &env, 4.0, &[1.0], &[1.0]).unwrap();
        assert!(inf.infinite_measure && inf.value == 0.0);
    }

    proptest! {
        #[test]
        fn symmetry_positivity_scaling(nu in -0.9f64..3.0, t in 1e-3f64..1e2, x in 1e-2f64..1e2, y in 1e-2f64..1e2, lam in 0.1f64..10.0) {
            let k = AxisKernel::classical(nu).unwrap();
            let a = k.eval(t, x, y);
            let b = k.eval(t, y, x);
            prop_assert!(a >= 0.0 && b >= 0.0);
            prop_assert!((a - b).abs() <= 1e-13 * a.max(1e-300));
            let s = k.eval(lam * lam * t, lam * x, lam * y);
            prop_assert!((s - lam.powf(-(2.0 * nu + 2.0)) * a).abs() <= 1e-11 * s.max(1e-300));
        }

        #[test]
        fn conjugation_identities(nu in 0.05f64..3.0, t in 1e-3f64..1e2, x in 1e-2f64..1e2, y in 1e-2f64..1e2) {
            let w = w_classical_1d(nu, t, x, y).unwrap();
            let k = k_conjugated_1d(nu, t, x, y).unwrap();
            prop_assert!((k - (y / x).powf(2.0 * nu) * w).abs() <= 1e-12 * k.max(1e-300));
            let kt = k_conjugated_1d(nu, t, y, x).unwrap();
            let l = x.powf(4.0 * nu) * k;
            prop_assert!((l - y.powf(4.0 * nu) * kt).abs() <= 1e-11 * l.max(1e-300));
            let e = w_exotic_1d(nu, t, x, y).unwrap();
            prop_assert!((e - (x * y).powf(2.0 * nu) * w).abs() <= 4.0 * f64::EPSILON * e.max(1e-300));
        }
    }
}
