//! Modified Bessel function of the first kind and the Gamma function.
//!
//! `I_τ` is evaluated by its ascending series below a crossover
//! `x₀(τ) = max(25, τ²)` and by the Hankel expansion
//! `e^x (2πx)^{-1/2} Σ (−1)^k a_k(τ) x^{-k}` above it. Both are computed in
//! scaled form so the exponential growth never has to be represented.

use serde::Serialize;

use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Order `τ > −1` of a Bessel function.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(tau: f64) -> Result<Self> {
        if tau.is_finite() && tau > -1.0 {
            Ok(BesselOrder(tau))
        } else {
            Err(Error::domain(format!("Bessel order must exceed -1, got {tau}")))
        }
    }

    pub fn tau(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Series,
    Asymptotic,
}

/// Scaled value `e^{−x} I_τ(x)` together with the evaluation path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesselEval {
    pub scaled: f64,
    pub regime: Regime,
    pub rel_error: f64,
    pub terms: usize,
}

/// Argument above which the asymptotic expansion is used.
pub fn crossover(tau: f64) -> f64 {
    25f64.max(tau * tau)
}

fn check_x(x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("Bessel argument must be positive and finite, got {x}")))
    }
}

/// `Σ_k (x²/4)^k Γ(τ+1) / (k! Γ(k+τ+1)) = sum · e^{shift}`.
fn series_sum(tau: f64, x: f64) -> (f64, f64, usize) {
    let q = 0.25 * x * x;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut shift = 0.0f64;
    let mut k = 0usize;
    loop {
        k += 1;
        let kf = k as f64;
        term *= q / (kf * (kf + tau));
        sum += term;
        if sum > 1e250 {
            sum *= 1e-250;
            term *= 1e-250;
            shift += 250.0 * std::f64::consts::LN_10;
        }
        if (term < EPS * 0.25 * sum && kf * kf > q) || k > 100_000 {
            break;
        }
    }
    (sum, shift, k + 1)
}

/// Hankel sum `Σ (−1)^k a_k(τ) x^{-k}` truncated at its smallest term.
fn hankel_sum(tau: f64, x: f64) -> (f64, f64, usize) {
    let mu = 4.0 * tau * tau;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut n = 1usize;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * kf * x);
        if next.abs() >= term.abs() && k > 1 {
            break;
        }
        term = next;
        sum += term;
        n += 1;
        if term.abs() < 0.25 * EPS * sum.abs() {
            break;
        }
    }
    (sum, term.abs(), n)
}

/// Evaluate `e^{−x} I_τ(x)` with regime and error information.
pub fn bessel_i_eval(tau: BesselOrder, x: f64) -> Result<BesselEval> {
    check_x(x)?;
    let tau = tau.tau();
    if x <= crossover(tau) {
        let (sum, shift, terms) = series_sum(tau, x);
        let direct = if shift == 0.0 && tau + 1.0 <= 170.0 {
            let pref = (0.5 * x).powf(tau) / gamma_unchecked(tau + 1.0) * (-x).exp();
            (pref.is_normal()).then_some(pref * sum)
        } else {
            None
        };
        let scaled = direct.unwrap_or_else(|| {
            let lp = tau * (0.5 * x).ln() - ln_gamma_unchecked(tau + 1.0) + shift - x;
            sum * lp.exp()
        });
        Ok(BesselEval {
            scaled,
            regime: Regime::Series,
            rel_error: 4.0 * terms as f64 * EPS,
            terms,
        })
    } else {
        let (sum, last, terms) = hankel_sum(tau, x);
        let scaled = sum / (2.0 * std::f64::consts::PI * x).sqrt();
        Ok(BesselEval {
            scaled,
            regime: Regime::Asymptotic,
            rel_error: last / sum.abs() + 4.0 * terms as f64 * EPS,
            terms,
        })
    }
}

/// `e^{−x} I_τ(x)`, finite for every positive finite `x`.
pub fn bessel_i_scaled(tau: BesselOrder, x: f64) -> Result<f64> {
    bessel_i_eval(tau, x).map(|e| e.scaled)
}

/// `I_τ(x)`. Fails with an overflow error when the value is not representable.
pub fn bessel_i(tau: BesselOrder, x: f64) -> Result<f64> {
    let s = bessel_i_scaled(tau, x)?;
    let v = if x < 700.0 {
        s * x.exp()
    } else {
        (s.ln() + x).exp()
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format!("I_{}({x}) exceeds the floating range", tau.tau())))
    }
}

/// `e^{−z} I_τ(z) / (z/2)^τ`, the smooth factor used by the heat kernels.
///
/// Tends to `1/Γ(τ+1)` as `z → 0` and is positive for all `z ≥ 0`.
pub fn bessel_i_reduced(tau: f64, z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0 / gamma_unchecked(tau + 1.0);
    }
    if z <= crossover(tau) {
        let (sum, shift, _) = series_sum(tau, z);
        if shift == 0.0 && tau + 1.0 <= 170.0 {
            sum * (-z).exp() / gamma_unchecked(tau + 1.0)
        } else {
            sum * (shift - z - ln_gamma_unchecked(tau + 1.0)).exp()
        }
    } else {
        let (sum, _, _) = hankel_sum(tau, z);
        let s = sum / (2.0 * std::f64::consts::PI * z).sqrt();
        s * (-tau * (0.5 * z).ln()).exp()
    }
}

fn lanczos_sum(z: f64) -> f64 {
    // z here is the shifted argument, i.e. Γ(z+1) is being computed
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    a
}

fn gamma_unchecked(z: f64) -> f64 {
    if z < 0.5 {
        return std::f64::consts::PI / ((std::f64::consts::PI * z).sin() * gamma_unchecked(1.0 - z));
    }
    if z == z.floor() && z <= 171.0 {
        let mut p = 1.0;
        let mut k = 2.0;
        while k < z {
            p *= k;
            k += 1.0;
        }
        return p;
    }
    let zm = z - 1.0;
    let t = zm + LANCZOS_G + 0.5;
    let half = t.powf(0.5 * (zm + 0.5));
    (2.0 * std::f64::consts::PI).sqrt() * half * (half * (-t).exp()) * lanczos_sum(zm)
}

fn ln_gamma_unchecked(z: f64) -> f64 {
    if z < 0.5 {
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * z).sin().abs().ln()
            - ln_gamma_unchecked(1.0 - z);
    }
    let zm = z - 1.0;
    let t = zm + LANCZOS_G + 0.5;
    HALF_LN_2PI + (zm + 0.5) * t.ln() - t + lanczos_sum(zm).ln()
}

/// Gamma function for real arguments away from its poles.
pub fn gamma_fn(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::domain(format!("gamma argument must be finite, got {z}")));
    }
    if z <= 0.0 && z == z.floor() {
        return Err(Error::Pole(z));
    }
    let g = gamma_unchecked(z);
    if g.is_finite() {
        Ok(g)
    } else {
        Err(Error::Overflow(format!("Γ({z}) exceeds the floating range")))
    }
}

/// `ln |Γ(z)|`.
pub fn ln_gamma(z: f64) -> Result<f64> {
    if z <= 0.0 && z == z.floor() {
        return Err(Error::Pole(z));
    }
    Ok(ln_gamma_unchecked(z))
}
