//! Run configuration shared by the command line and the verification battery.

use serde::{Deserialize, Serialize};

use crate::covering::{cylinder_covering, dyadic_covering_1d, dyadic_power, qb_covering, Covering, Window, DEFAULT_KAPPA};
use crate::error::{Error, Result};
use crate::maximal::QuadratureSpec;
use crate::measure::{Flavor, NuVector};
use crate::verify::VerifySettings;

/// Every knob of a run. Reports embed the resolved value verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub nu: Vec<f64>,
    pub flavors: Vec<Flavor>,
    /// `dyadic`, `box:N`, `cylinder:D1:D2` or `qb`.
    pub covering: String,
    /// Inclusive dyadic level range.
    pub window: [i64; 2],
    pub kappa: f64,
    /// Defaults to `min(0.3, ν/2)` per exotic order.
    pub gamma: Option<f64>,
    /// Overrides the default `{−γ/2, 0, γ/2}`; the nonnegative ones feed (A2).
    pub deltas: Vec<f64>,
    /// Exponent of the envelope integrals; clipped below the admissible bound.
    pub envelope_delta: f64,
    pub depth: u32,
    pub seed: u64,
    pub threads: Option<usize>,
    pub quadrature: QuadratureSpec,
    pub verify: VerifySettings,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            nu: vec![0.5, 1.0],
            flavors: vec![Flavor::Classical, Flavor::Exotic],
            covering: "qb".into(),
            window: [-3, 3],
            kappa: DEFAULT_KAPPA,
            gamma: None,
            deltas: vec![],
            envelope_delta: 0.2,
            depth: 4,
            seed: 0,
            threads: None,
            quadrature: QuadratureSpec::default(),
            verify: VerifySettings::default(),
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn nu_vector(&self) -> Result<NuVector> {
        NuVector::from_parts(&self.nu, &self.flavors)
    }

    pub fn window(&self) -> Result<Window> {
        Window::new(self.window[0], self.window[1])
    }

    pub fn covering(&self) -> Result<Covering> {
        let d1 = self.flavors.iter().filter(|f| **f == Flavor::Classical).count();
        let cov = parse_covering(&self.covering, d1, self.nu.len() - d1)?;
        if cov.dim() != self.nu.len() {
            return Err(Error::Config(format!(
                "covering {} has dimension {} but nu has {} axes",
                self.covering,
                cov.dim(),
                self.nu.len()
            )));
        }
        cov.with_kappa(self.kappa)
    }

    /// Exotic orders with their `γ`.
    pub fn gammas(&self) -> Vec<(f64, f64)> {
        self.nu
            .iter()
            .zip(&self.flavors)
            .filter(|(_, f)| **f == Flavor::Exotic)
            .map(|(&n, _)| (n, self.gamma.unwrap_or((0.5 * n).min(0.3))))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu.is_empty() {
            return Err(Error::Config("nu must have at least one axis".into()));
        }
        if self.nu.len() > crate::verify::MAX_DIM {
            return Err(Error::Config(format!("at most {} axes are supported", crate::verify::MAX_DIM)));
        }
        if self.nu.len() != self.flavors.len() {
            return Err(Error::Config("nu and flavors must have the same length".into()));
        }
        self.nu_vector()?;
        let first_exotic = self.flavors.iter().position(|f| *f == Flavor::Exotic).unwrap_or(self.flavors.len());
        if self.flavors[first_exotic..].contains(&Flavor::Classical) {
            return Err(Error::Config("classical axes must precede exotic axes".into()));
        }
        self.window()?;
        if !(self.kappa > 1.0 && self.kappa <= 1.5) {
            return Err(Error::Config(format!("kappa must lie in (1, 1.5], got {}", self.kappa)));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g < 1.0 / 3.0) {
                return Err(Error::Config(format!("gamma must lie in (0, 1/3), got {g}")));
            }
        }
        if self.deltas.iter().any(|d| !d.is_finite()) || !(self.envelope_delta > 0.0) {
            return Err(Error::Config("deltas must be finite and envelope_delta positive".into()));
        }
        if self.depth > 12 {
            return Err(Error::Config("depth must be at most 12".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        self.quadrature.validate()?;
        self.verify.validate()?;
        self.covering()?;
        Ok(())
    }
}

/// Parse `dyadic`, `box:N`, `cylinder:D1:D2` or `qb` (split from the flavors).
pub fn parse_covering(name: &str, d1: usize, d2: usize) -> Result<Covering> {
    let parts: Vec<&str> = name.split(':').collect();
    let num = |s: &str| s.parse::<usize>().map_err(|_| Error::Config(format!("bad covering size in {name}")));
    match parts.as_slice() {
        ["dyadic"] => Ok(dyadic_covering_1d()),
        ["box", n] => {
            let n = num(n)?;
            if n == 0 {
                return Err(Error::Config("box covering needs N >= 1".into()));
            }
            Ok(dyadic_power(n))
        }
        ["cylinder", a, b] => {
            let b = num(b)?;
            if b == 0 {
                return Err(Error::Config("cylinder covering needs D2 >= 1".into()));
            }
            Ok(cylinder_covering(num(a)?, dyadic_power(b)))
        }
        ["qb"] if d2 > 0 => Ok(qb_covering(d1, d2)),
        ["qb"] => Err(Error::Config("qb covering needs an exotic axis".into())),
        _ => Err(Error::Config(format!("unknown covering {name}"))),
    }
}
