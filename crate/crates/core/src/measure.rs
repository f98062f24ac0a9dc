//! Power-weight measures `dμ_ν(x) = x^{2ν+1} dx` on the half-line and their products.
//!
//! Values are extended reals: `f64::INFINITY` is returned for sets touching the
//! origin whenever `2ν + 2 ≤ 0`.

use serde::{Deserialize, Serialize};

use crate::covering::Cuboid;
use crate::error::{check_dims, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Classical,
    Exotic,
}

/// One axis of a multiparameter. Exotic axes store `ν_e > 0` and act with exponent `−ν_e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuAxis {
    pub nu: f64,
    pub flavor: Flavor,
}

impl NuAxis {
    pub fn classical(nu: f64) -> Result<Self> {
        if nu.is_finite() && nu > -1.0 {
            Ok(NuAxis { nu, flavor: Flavor::Classical })
        } else {
            Err(Error::domain(format!("classical axis needs nu > -1, got {nu}")))
        }
    }

    pub fn exotic(nu_e: f64) -> Result<Self> {
        if nu_e.is_finite() && nu_e > 0.0 {
            Ok(NuAxis { nu: nu_e, flavor: Flavor::Exotic })
        } else {
            Err(Error::domain(format!("exotic axis needs nu_e > 0, got {nu_e}")))
        }
    }

    pub fn effective(&self) -> f64 {
        match self.flavor {
            Flavor::Classical => self.nu,
            Flavor::Exotic => -self.nu,
        }
    }

    pub fn weight_exponent(&self) -> f64 {
        2.0 * self.effective() + 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuVector {
    pub axes: Vec<NuAxis>,
}

impl NuVector {
    pub fn new(axes: Vec<NuAxis>) -> Self {
        NuVector { axes }
    }

    /// Build from raw values and flavors, validating each axis.
    pub fn from_parts(nu: &[f64], flavors: &[Flavor]) -> Result<Self> {
        check_dims(nu.len(), flavors.len())?;
        nu.iter()
            .zip(flavors)
            .map(|(&v, f)| match f {
                Flavor::Classical => NuAxis::classical(v),
                Flavor::Exotic => NuAxis::exotic(v),
            })
            .collect::<Result<Vec<_>>>()
            .map(NuVector::new)
    }

    /// All-classical vector from effective exponents, used for plain weights.
    pub fn classical(nu: &[f64]) -> Result<Self> {
        nu.iter().map(|&v| NuAxis::classical(v)).collect::<Result<Vec<_>>>().map(NuVector::new)
    }

    /// Effective exponents without range checks; any real is a valid weight.
    pub fn effective(&self) -> Vec<f64> {
        self.axes.iter().map(NuAxis::effective).collect()
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }
}

/// Closed interval `[a, b]` with `0 ≤ a < b`; `b = ∞` is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a.is_finite() && a >= 0.0 && b > a {
            Ok(Interval { a, b })
        } else {
            Err(Error::domain(format!("invalid interval [{a}, {b}]")))
        }
    }
}

/// `∫_a^b x^{2ν+1} dx` for `0 ≤ a < b < ∞`, with `ν` an arbitrary real.
pub fn interval_weight(nu: f64, a: f64, b: f64) -> f64 {
    let p = 2.0 * nu + 2.0;
    if a == 0.0 {
        return if p > 0.0 { b.powf(p) / p } else { f64::INFINITY };
    }
    let l = ((b - a) / a).ln_1p();
    if p == 0.0 {
        return l;
    }
    let m = if p > 0.0 { b.powf(p) } else { a.powf(p) };
    m * (-(-p.abs() * l).exp_m1()) / p.abs()
}

pub fn measure_interval(nu: f64, iv: &Interval) -> Result<f64> {
    if !iv.b.is_finite() {
        return Err(Error::domain("exact measure needs a bounded interval"));
    }
    Ok(interval_weight(nu, iv.a, iv.b))
}

pub fn measure_cuboid(nu: &NuVector, q: &Cuboid) -> Result<f64> {
    check_dims(nu.dim(), q.dim())?;
    Ok(measure_box(&nu.effective(), q.lower(), q.upper()))
}

/// Product measure of `∏ [lo_k, hi_k]` for effective exponents `nu`.
pub fn measure_box(nu: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    nu.iter()
        .zip(lo.iter().zip(hi))
        .map(|(&v, (&a, &b))| interval_weight(v, a, b))
        .product()
}

fn check_ball(x: f64, r: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 && r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("ball needs x > 0 and r > 0, got x={x}, r={r}")))
    }
}

/// `μ_ν(B(x, r) ∩ ℝ₊)`.
pub fn measure_ball_exact(nu: f64, x: f64, r: f64) -> Result<f64> {
    check_ball(x, r)?;
    Ok(interval_weight(nu, (x - r).max(0.0), x + r))
}

/// Closed-form quantity comparable to `μ_ν(B(x, r))`.
pub fn measure_ball_comparable(nu: f64, x: f64, r: f64) -> Result<f64> {
    check_ball(x, r)?;
    let p = 2.0 * nu + 2.0;
    if nu > -1.0 {
        return Ok((r / x).min(1.0) * (x + r).powf(p));
    }
    if r >= x {
        return Err(Error::Precondition(format!(
            "for nu <= -1 the comparable ball measure needs r < x, got x={x}, r={r}"
        )));
    }
    if nu == -1.0 {
        Ok((2.0 * r / (x - r)).ln_1p())
    } else {
        Ok((r / x).min(1.0) * (x - r).powf(p))
    }
}

/// Comparable quantity for the cube `B(x, r) = ∏ [x_j − r, x_j + r]`.
pub fn measure_ball_multidim_comparable(nu: &NuVector, x: &[f64], r: f64) -> Result<f64> {
    check_dims(nu.dim(), x.len())?;
    if !(r > 0.0) || x.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::domain("ball needs positive centre and radius"));
    }
    let d = x.len() as i32;
    let min_x = x.iter().cloned().fold(f64::INFINITY, f64::min);
    if r < 0.5 * min_x {
        return Ok(r.powi(d) * nu.axes.iter().zip(x).map(|(a, &v)| v.powf(a.weight_exponent())).product::<f64>());
    }
    if nu.axes.iter().all(|a| a.effective() > -1.0) {
        return Ok(r.powi(d)
            * nu.axes.iter().zip(x).map(|(a, &v)| (v + r).powf(a.weight_exponent())).product::<f64>());
    }
    Err(Error::Precondition(
        "radius must be below half the smallest coordinate unless every axis is in the classical range".into(),
    ))
}

/// Exact measure of the cube ball `∏ [x_j − r, x_j + r] ∩ ℝ₊^d`.
pub fn measure_ball_box(nu: &[f64], x: &[f64], r: f64) -> f64 {
    nu.iter()
        .zip(x)
        .map(|(&v, &c)| interval_weight(v, (c - r).max(0.0), c + r))
        .product()
}

/// Max/min summary of a sampled ratio, reported as a comparability constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioFit {
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

impl RatioFit {
    pub fn new() -> Self {
        RatioFit { min: f64::INFINITY, max: 0.0, samples: 0 }
    }

    pub fn push(&mut self, v: f64) {
        self.min = self.min.min(v);
        self.max = self.max.max(v);
        self.samples += 1;
    }

    /// Smallest `C` with every sample in `[1/C, C]`.
    pub fn constant(&self) -> f64 {
        self.max.max(1.0 / self.min)
    }

    pub fn spread(&self) -> f64 {
        self.max / self.min
    }
}

impl Default for RatioFit {
    fn default() -> Self {
        Self::new()
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1).max(1) as f64))
        .collect()
}

/// Fit of `measure_ball_exact / measure_ball_comparable` over an `n × n` log grid
/// of `(x, r) ∈ [2⁻⁶, 2⁶] × [2⁻⁸, 2⁸]`, keeping only pairs allowed for this `ν`.
pub fn comparability_fit(nu: f64, n: usize) -> RatioFit {
    let mut fit = RatioFit::new();
    for &x in &log_grid(2f64.powi(-6), 2f64.powi(6), n) {
        for &r in &log_grid(2f64.powi(-8), 2f64.powi(8), n) {
            if nu <= -1.0 && r >= x {
                continue;
            }
            let e = measure_ball_exact(nu, x, r).unwrap();
            let c = measure_ball_comparable(nu, x, r).unwrap();
            fit.push(e / c);
        }
    }
    fit
}

/// Largest `μ(B(x,2r)) / μ(B(x,r))` over the doubling grid, for classical exponents.
pub fn doubling_constant(nu: &[f64], n: usize) -> f64 {
    let xs = log_grid(2f64.powi(-6), 2f64.powi(6), n);
    let rs = log_grid(2f64.powi(-8), 2f64.powi(8), n);
    let d = nu.len();
    let mut worst: f64 = 0.0;
    let total = xs.len().pow(d as u32);
    for flat in 0..total {
        let mut rem = flat;
        let x: Vec<f64> = (0..d)
            .map(|_| {
                let v = xs[rem % xs.len()];
                rem /= xs.len();
                v
            })
            .collect();
        for &r in &rs {
            let ratio = measure_ball_box(nu, &x, 2.0 * r) / measure_ball_box(nu, &x, r);
            worst = worst.max(ratio);
        }
    }
    worst
}
