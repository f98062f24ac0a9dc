//! Admissible coverings of the closed orthant `ℝ₊^d`.
//!
//! Coverings are infinite, so enumeration always goes through a [`Window`]
//! that bounds the dyadic levels of every factor.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};

const TOL: f64 = 1e-12;
const MAX_ELEMENTS: usize = 4_000_000;

/// Axis-parallel box `∏ [lower_k, upper_k]` in the closed orthant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cuboid {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Cuboid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dims(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::domain("cuboid needs at least one axis"));
        }
        for (&a, &b) in lower.iter().zip(&upper) {
            if !(a >= 0.0 && b > a && b.is_finite()) {
                return Err(Error::domain(format!("invalid cuboid side [{a}, {b}]")));
            }
        }
        Ok(Cuboid { lower, upper })
    }

    /// `Q(z, r) ∩ ℝ₊^d`.
    pub fn from_center(center: &[f64], radii: &[f64]) -> Result<Self> {
        check_dims(center.len(), radii.len())?;
        if center.iter().any(|&z| !(z > 0.0)) || radii.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::domain("cuboid centre and radii must be positive"));
        }
        Ok(Self::clipped(center, radii, 1.0))
    }

    fn clipped(center: &[f64], radii: &[f64], factor: f64) -> Self {
        Cuboid {
            lower: center.iter().zip(radii).map(|(z, r)| (z - factor * r).max(0.0)).collect(),
            upper: center.iter().zip(radii).map(|(z, r)| z + factor * r).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(a, b)| 0.5 * (b - a)).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }

    /// `Q(z, factor · r)` clipped to the orthant.
    pub fn enlarged(&self, factor: f64) -> Cuboid {
        Self::clipped(&self.center(), &self.radii(), factor)
    }

    /// The `k`-fold star `Q^{*k} = Q(z, κ^k r)`.
    pub fn star(&self, kappa: f64, k: i32) -> Cuboid {
        self.enlarged(kappa.powi(k))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(&v, (&a, &b))| v >= a && v <= b)
    }

    /// Containment with a relative slack, for boxes assembled by floating arithmetic.
    pub fn contains_box(&self, lo: &[f64], hi: &[f64]) -> bool {
        (0..self.dim()).all(|k| {
            let s = TOL * (self.upper[k] - self.lower[k]).max(self.upper[k]);
            lo[k] >= self.lower[k] - s && hi[k] <= self.upper[k] + s
        })
    }

    /// Closed intersection; touching boxes intersect.
    pub fn intersects(&self, other: &Cuboid) -> bool {
        self.intersects_box(&other.lower, &other.upper)
    }

    pub fn intersects_box(&self, lo: &[f64], hi: &[f64]) -> bool {
        (0..self.dim()).all(|k| self.lower[k] <= hi[k] && lo[k] <= self.upper[k])
    }

    /// Intersection with nonempty interior.
    pub fn overlaps(&self, other: &Cuboid) -> bool {
        (0..self.dim()).all(|k| {
            let lo = self.lower[k].max(other.lower[k]);
            let hi = self.upper[k].min(other.upper[k]);
            hi - lo > TOL * (self.upper[k] - self.lower[k]).min(other.upper[k] - other.lower[k])
        })
    }
}

/// Level bounds applied to every dyadic factor during enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub level_min: i64,
    pub level_max: i64,
}

impl Window {
    pub fn new(level_min: i64, level_max: i64) -> Result<Self> {
        if level_min > level_max {
            return Err(Error::Window(format!("empty level window [{level_min}, {level_max}]")));
        }
        Ok(Window { level_min, level_max })
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.level_min && n <= self.level_max
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Dyadic,
    Product(Box<Covering>, Box<Covering>),
    Cylinder(usize, Box<Covering>),
}

/// An admissible covering given by an index rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Covering {
    kind: Kind,
    kappa: f64,
    dim: usize,
    index_len: usize,
}

/// A covering element with its index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Element {
    pub index: Vec<i64>,
    pub cube: Cuboid,
}

pub const DEFAULT_KAPPA: f64 = 17.0 / 16.0;

/// `𝒟 = {[2ⁿ, 2ⁿ⁺¹] : n ∈ ℤ}`.
pub fn dyadic_covering_1d() -> Covering {
    Covering { kind: Kind::Dyadic, kappa: DEFAULT_KAPPA, dim: 1, index_len: 1 }
}

/// `q1 ⊠ q2`: the larger factor of each product cell is tiled into equal pieces.
pub fn box_product(q1: Covering, q2: Covering) -> Covering {
    let dim = q1.dim + q2.dim;
    let index_len = q1.index_len + q2.index_len + dim;
    let kappa = q1.kappa.min(q2.kappa);
    Covering { kind: Kind::Product(Box::new(q1), Box::new(q2)), kappa, dim, index_len }
}

/// `ℝ₊^{d1} ⊠ q2`: each cylinder `ℝ₊^{d1} × Q₂` is cut into cubes of side `d_{Q₂}`.
pub fn cylinder_covering(d1: usize, q2: Covering) -> Covering {
    if d1 == 0 {
        return q2;
    }
    let dim = d1 + q2.dim;
    let index_len = q2.index_len + d1;
    let kappa = q2.kappa;
    Covering { kind: Kind::Cylinder(d1, Box::new(q2)), kappa, dim, index_len }
}

/// `𝒟 ⊠ ⋯ ⊠ 𝒟` with `k` factors.
pub fn dyadic_power(k: usize) -> Covering {
    let mut c = dyadic_covering_1d();
    for _ in 1..k {
        c = box_product(c, dyadic_covering_1d());
    }
    c
}

/// The covering `ℝ₊^{d1} ⊠ 𝒟^{⊠ d2}`.
pub fn qb_covering(d1: usize, d2: usize) -> Covering {
    cylinder_covering(d1, dyadic_power(d2))
}

/// Pieces per axis: the smallest power of two bringing the diameter down to `d_small`.
fn pieces(d_big: f64, d_small: f64) -> i64 {
    let m = ((d_big / d_small) * (1.0 - TOL)).ceil().max(1.0) as u64;
    m.next_power_of_two() as i64
}

fn dyadic_level(x: f64) -> i64 {
    // smallest n with x <= 2^{n+1}
    let mut n = x.log2().ceil() as i64 - 1;
    while 2f64.powi((n + 1) as i32) < x {
        n += 1;
    }
    while n > i64::from(i32::MIN) && 2f64.powi(n as i32) >= x {
        n -= 1;
    }
    n
}

fn axis_range(lo: f64, hi: f64, a: f64, w: f64, m: i64) -> (i64, i64) {
    // piece j covers [a + j w, a + (j+1) w]; closed intersection with [lo, hi]
    let first = (((lo - a) / w).ceil() as i64 - 1).max(0);
    let last = (((hi - a) / w).floor() as i64).min(m - 1);
    (first, last)
}

impl Covering {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        if !(kappa > 1.0 && kappa < 2.0) {
            return Err(Error::Config(format!("kappa must lie in (1, 2), got {kappa}")));
        }
        self.kappa = kappa;
        if let Kind::Product(a, b) = &mut self.kind {
            **a = a.as_ref().clone().with_kappa(kappa)?;
            **b = b.as_ref().clone().with_kappa(kappa)?;
        }
        if let Kind::Cylinder(_, b) = &mut self.kind {
            **b = b.as_ref().clone().with_kappa(kappa)?;
        }
        Ok(self)
    }

    pub fn index_len(&self) -> usize {
        self.index_len
    }

    /// Short human-readable name.
    pub fn name(&self) -> String {
        match &self.kind {
            Kind::Dyadic => "D".into(),
            Kind::Product(a, b) => format!("({}x{})", a.name(), b.name()),
            Kind::Cylinder(d1, q) => format!("R+^{d1}x{}", q.name()),
        }
    }

    /// The element with the given index, if the index is valid.
    pub fn element(&self, index: &[i64]) -> Result<Element> {
        check_dims(self.index_len, index.len())?;
        let cube = self.cube_of(index)?;
        Ok(Element { index: index.to_vec(), cube })
    }

    fn cube_of(&self, index: &[i64]) -> Result<Cuboid> {
        match &self.kind {
            Kind::Dyadic => {
                let n = index[0];
                if n.abs() > 1000 {
                    return Err(Error::Window(format!("dyadic level {n} out of range")));
                }
                let a = 2f64.powi(n as i32);
                Ok(Cuboid { lower: vec![a], upper: vec![2.0 * a] })
            }
            Kind::Product(q1, q2) => {
                let (i1, rest) = index.split_at(q1.index_len);
                let (i2, sub) = rest.split_at(q2.index_len);
                let c1 = q1.cube_of(i1)?;
                let c2 = q2.cube_of(i2)?;
                Self::split_pair(&c1, &c2, Some(sub)).map(|mut v| v.remove(0))
            }
            Kind::Cylinder(d1, q2) => {
                let (i2, ks) = index.split_at(q2.index_len);
                let c2 = q2.cube_of(i2)?;
                let s = c2.diameter();
                let mut lower = Vec::with_capacity(self.dim);
                let mut upper = Vec::with_capacity(self.dim);
                for &k in ks.iter().take(*d1) {
                    if k < 0 {
                        return Err(Error::domain("cylinder offsets must be nonnegative"));
                    }
                    lower.push(k as f64 * s);
                    upper.push((k + 1) as f64 * s);
                }
                lower.extend_from_slice(&c2.lower);
                upper.extend_from_slice(&c2.upper);
                Ok(Cuboid { lower, upper })
            }
        }
    }

    /// Pieces of `c1 × c2`: all of them, or only the one named by `sub`.
    fn split_pair(c1: &Cuboid, c2: &Cuboid, sub: Option<&[i64]>) -> Result<Vec<Cuboid>> {
        let (d1, d2) = (c1.diameter(), c2.diameter());
        let (m1, m2) = if d1 > d2 { (pieces(d1, d2), 1) } else { (1, pieces(d2, d1)) };
        let dim1 = c1.dim();
        let ms: Vec<i64> = (0..dim1 + c2.dim()).map(|k| if k < dim1 { m1 } else { m2 }).collect();
        let lo: Vec<f64> = c1.lower.iter().chain(&c2.lower).cloned().collect();
        let hi: Vec<f64> = c1.upper.iter().chain(&c2.upper).cloned().collect();
        let build = |js: &[i64]| -> Cuboid {
            let mut lower = Vec::with_capacity(js.len());
            let mut upper = Vec::with_capacity(js.len());
            for k in 0..js.len() {
                let w = (hi[k] - lo[k]) / ms[k] as f64;
                lower.push(lo[k] + js[k] as f64 * w);
                upper.push(if js[k] == ms[k] - 1 { hi[k] } else { lo[k] + (js[k] + 1) as f64 * w });
            }
            Cuboid { lower, upper }
        };
        if let Some(js) = sub {
            if js.iter().zip(&ms).any(|(&j, &m)| j < 0 || j >= m) {
                return Err(Error::domain("product piece index out of range"));
            }
            return Ok(vec![build(js)]);
        }
        Ok(vec![build(&vec![0; ms.len()])])
    }

    fn split_params(c1: &Cuboid, c2: &Cuboid) -> Vec<i64> {
        let (d1, d2) = (c1.diameter(), c2.diameter());
        let (m1, m2) = if d1 > d2 { (pieces(d1, d2), 1) } else { (1, pieces(d2, d1)) };
        (0..c1.dim() + c2.dim()).map(|k| if k < c1.dim() { m1 } else { m2 }).collect()
    }

    /// An element containing `x`; shared boundaries go to the smaller index.
    pub fn locate(&self, x: &[f64]) -> Result<Element> {
        check_dims(self.dim, x.len())?;
        if x.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::domain("locate needs a point in the open orthant"));
        }
        self.locate_unchecked(x)
    }

    fn locate_unchecked(&self, x: &[f64]) -> Result<Element> {
        match &self.kind {
            Kind::Dyadic => self.element(&[dyadic_level(x[0])]),
            Kind::Product(q1, q2) => {
                let e1 = q1.locate_unchecked(&x[..q1.dim])?;
                let e2 = q2.locate_unchecked(&x[q1.dim..])?;
                let ms = Self::split_params(&e1.cube, &e2.cube);
                let lo: Vec<f64> = e1.cube.lower.iter().chain(&e2.cube.lower).cloned().collect();
                let hi: Vec<f64> = e1.cube.upper.iter().chain(&e2.cube.upper).cloned().collect();
                let mut index = e1.index;
                index.extend(e2.index);
                for k in 0..self.dim {
                    let w = (hi[k] - lo[k]) / ms[k] as f64;
                    let j = (((x[k] - lo[k]) / w).ceil() as i64 - 1).clamp(0, ms[k] - 1);
                    index.push(j);
                }
                self.element(&index)
            }
            Kind::Cylinder(d1, q2) => {
                let e2 = q2.locate_unchecked(&x[*d1..])?;
                let s = e2.cube.diameter();
                let mut index = e2.index;
                for &v in &x[..*d1] {
                    index.push(((v / s).ceil() as i64 - 1).max(0));
                }
                self.element(&index)
            }
        }
    }

    /// Elements meeting the closed box `[lo, hi]`, with dyadic levels inside `w`.
    pub fn elements_in_box(&self, lo: &[f64], hi: &[f64], w: &Window) -> Result<Vec<Element>> {
        check_dims(self.dim, lo.len())?;
        check_dims(self.dim, hi.len())?;
        if hi.iter().any(|v| !v.is_finite()) {
            return Err(Error::Window("enumeration box must be bounded".into()));
        }
        let mut out = Vec::new();
        self.collect_in_box(lo, hi, w, &mut out)?;
        Ok(out)
    }

    fn collect_in_box(&self, lo: &[f64], hi: &[f64], w: &Window, out: &mut Vec<Element>) -> Result<()> {
        match &self.kind {
            Kind::Dyadic => {
                if hi[0] <= 0.0 {
                    return Ok(());
                }
                let mut n = if lo[0] > 0.0 { (dyadic_level(lo[0]) - 1).max(w.level_min) } else { w.level_min };
                while n <= w.level_max && 2f64.powi(n as i32) <= hi[0] {
                    if 2f64.powi(n as i32 + 1) >= lo[0] {
                        out.push(self.element(&[n])?);
                    }
                    n += 1;
                }
                Ok(())
            }
            Kind::Product(q1, q2) => {
                let mut a = Vec::new();
                q1.collect_in_box(&lo[..q1.dim], &hi[..q1.dim], w, &mut a)?;
                let mut b = Vec::new();
                q2.collect_in_box(&lo[q1.dim..], &hi[q1.dim..], w, &mut b)?;
                for e1 in &a {
                    for e2 in &b {
                        let ms = Self::split_params(&e1.cube, &e2.cube);
                        let plo: Vec<f64> = e1.cube.lower.iter().chain(&e2.cube.lower).cloned().collect();
                        let phi: Vec<f64> = e1.cube.upper.iter().chain(&e2.cube.upper).cloned().collect();
                        let ranges: Vec<(i64, i64)> = (0..self.dim)
                            .map(|k| axis_range(lo[k], hi[k], plo[k], (phi[k] - plo[k]) / ms[k] as f64, ms[k]))
                            .collect();
                        if ranges.iter().any(|(f, l)| f > l) {
                            continue;
                        }
                        let count: i64 = ranges.iter().map(|(f, l)| l - f + 1).product();
                        if out.len() + count as usize > MAX_ELEMENTS {
                            return Err(Error::Window("too many covering elements in window".into()));
                        }
                        let mut js: Vec<i64> = ranges.iter().map(|r| r.0).collect();
                        loop {
                            let mut index = e1.index.clone();
                            index.extend(&e2.index);
                            index.extend(&js);
                            out.push(self.element(&index)?);
                            let mut k = 0;
                            loop {
                                if k == js.len() {
                                    break;
                                }
                                js[k] += 1;
                                if js[k] <= ranges[k].1 {
                                    break;
                                }
                                js[k] = ranges[k].0;
                                k += 1;
                            }
                            if k == js.len() {
                                break;
                            }
                        }
                    }
                }
                Ok(())
            }
            Kind::Cylinder(d1, q2) => {
                let mut b = Vec::new();
                q2.collect_in_box(&lo[*d1..], &hi[*d1..], w, &mut b)?;
                for e2 in &b {
                    let s = e2.cube.diameter();
                    let ranges: Vec<(i64, i64)> =
                        (0..*d1).map(|k| axis_range(lo[k], hi[k], 0.0, s, i64::MAX / 4)).collect();
                    if ranges.iter().any(|(f, l)| f > l) {
                        continue;
                    }
                    let count: f64 = ranges.iter().map(|(f, l)| (l - f + 1) as f64).product();
                    if out.len() as f64 + count > MAX_ELEMENTS as f64 {
                        return Err(Error::Window("too many covering elements in window".into()));
                    }
                    let mut ks: Vec<i64> = ranges.iter().map(|r| r.0).collect();
                    loop {
                        let mut index = e2.index.clone();
                        index.extend(&ks);
                        out.push(self.element(&index)?);
                        let mut k = 0;
                        loop {
                            if k == ks.len() {
                                break;
                            }
                            ks[k] += 1;
                            if ks[k] <= ranges[k].1 {
                                break;
                            }
                            ks[k] = ranges[k].0;
                            k += 1;
                        }
                        if k == ks.len() {
                            break;
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Dyadic levels of every `𝒟` factor, in axis order of the dyadic factors.
    pub fn levels(&self, index: &[i64]) -> Vec<i64> {
        match &self.kind {
            Kind::Dyadic => vec![index[0]],
            Kind::Product(q1, q2) => {
                let mut v = q1.levels(&index[..q1.index_len]);
                v.extend(q2.levels(&index[q1.index_len..q1.index_len + q2.index_len]));
                v
            }
            Kind::Cylinder(_, q2) => q2.levels(&index[..q2.index_len]),
        }
    }

    /// Elements that might be neighbours of `q`.
    pub fn candidates(&self, q: &Cuboid) -> Result<Vec<Element>> {
        let k3 = self.kappa.powi(3);
        let b = q.enlarged(k3 + 8.0 * (k3 - 1.0));
        self.elements_in_box(b.lower(), b.upper(), &Window { level_min: -1000, level_max: 1000 })
    }

    /// `N(Q) = {Q̃ : Q̃*** ∩ Q*** ≠ ∅}`.
    pub fn neighbors(&self, q: &Cuboid) -> Result<Vec<Element>> {
        let q3 = q.star(self.kappa, 3);
        Ok(self
            .candidates(q)?
            .into_iter()
            .filter(|e| e.cube.star(self.kappa, 3).intersects(&q3))
            .collect())
    }

    /// Smooth bump equal to 1 on `Q` and vanishing outside `Q*`.
    pub fn bump(&self, q: &Cuboid, x: &[f64]) -> f64 {
        let c = q.center();
        let r = q.radii();
        let mut v = 1.0;
        for k in 0..x.len() {
            let u = (self.kappa * r[k] - (x[k] - c[k]).abs()) / ((self.kappa - 1.0) * r[k]);
            let u = u.clamp(0.0, 1.0);
            v *= u * u * (3.0 - 2.0 * u);
            if v == 0.0 {
                break;
            }
        }
        v
    }

    /// All nonzero `ψ_Q(x)` of the partition of unity, indexed by element.
    pub fn partition_of_unity(&self, x: &[f64]) -> Result<Vec<(Element, f64)>> {
        let host = self.locate(x)?;
        // elements whose star holds x touch the host, so their radii are comparable to it
        let reach = 8.0 * (self.kappa - 1.0) * host.cube.radii().iter().cloned().fold(0.0, f64::max);
        let lo: Vec<f64> = x.iter().map(|v| (v - reach).max(0.0)).collect();
        let hi: Vec<f64> = x.iter().map(|v| v + reach).collect();
        let mut terms: Vec<(Element, f64)> = self
            .elements_in_box(&lo, &hi, &Window { level_min: -1000, level_max: 1000 })?
            .into_iter()
            .filter_map(|e| {
                let b = self.bump(&e.cube, x);
                (b > 0.0).then_some((e, b))
            })
            .collect();
        let total: f64 = terms.iter().map(|t| t.1).sum();
        for t in &mut terms {
            t.1 /= total;
        }
        Ok(terms)
    }

    /// `ψ_Q(x)` for one element.
    pub fn psi(&self, q: &Element, x: &[f64]) -> Result<f64> {
        if !q.cube.star(self.kappa, 1).contains(x) {
            return Ok(0.0);
        }
        Ok(self
            .partition_of_unity(x)?
            .into_iter()
            .find(|(e, _)| e.index == q.index)
            .map(|t| t.1)
            .unwrap_or(0.0))
    }
}

/// Measured constants of an admissible covering over a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringReport {
    pub covering: String,
    pub kappa: f64,
    pub elements_checked: usize,
    pub points_sampled: usize,
    pub axiom1_covered: bool,
    pub axiom2_disjoint: bool,
    pub c1_shape: f64,
    pub c2_neighbor_ratio: f64,
    pub equivalence_star3: bool,
    pub max_overlap_star3: usize,
    pub max_neighbors: usize,
    pub pou_max_error: f64,
    pub pou_support_ok: bool,
    pub pass: bool,
}

/// Spatial box covered by levels `[n_min, n_max]` of every dyadic factor.
pub fn window_box(cov: &Covering, w: &Window) -> (Vec<f64>, Vec<f64>) {
    let a = 2f64.powi(w.level_min as i32);
    let b = 2f64.powi(w.level_max as i32 + 1);
    let d1 = match &cov.kind {
        Kind::Cylinder(d1, _) => *d1,
        _ => 0,
    };
    let lo = (0..cov.dim).map(|k| if k < d1 { 0.0 } else { a }).collect();
    let hi = vec![b; cov.dim];
    (lo, hi)
}

/// Check the admissibility axioms, the star equivalence, bounded overlap and the
/// partition of unity on a window. At most `max_elements` elements are examined;
/// larger windows are subsampled deterministically from `seed`.
pub fn check_covering(cov: &Covering, w: &Window, points: usize, max_elements: usize, seed: u64) -> Result<CoveringReport> {
    let (lo, hi) = window_box(cov, w);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample_point = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..cov.dim)
            .map(|k| {
                if lo[k] == 0.0 {
                    hi[k] * rng.gen::<f64>().max(1e-9)
                } else {
                    lo[k] * (hi[k] / lo[k]).powf(rng.gen::<f64>())
                }
            })
            .collect()
    };
    let all = cov.elements_in_box(&lo, &hi, w);
    let elements: Vec<Element> = match all {
        Ok(v) if v.len() <= max_elements => v,
        _ => {
            let mut v: Vec<Element> = Vec::new();
            while v.len() < max_elements {
                let e = cov.locate(&sample_point(&mut rng))?;
                if !v.iter().any(|o| o.index == e.index) {
                    v.push(e);
                }
            }
            v
        }
    };
    let kappa = cov.kappa;
    let stats: Vec<(bool, f64, f64, bool, usize)> = crate::par::map(&elements, |e| {
        let cands = cov.candidates(&e.cube).unwrap_or_default();
        let r = e.cube.radii();
        let c1 = r.iter().cloned().fold(0.0, f64::max) / r.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut disjoint = true;
        let mut c2: f64 = 1.0;
        let mut equiv = true;
        let e3 = e.cube.star(kappa, 3);
        let mut nbrs = 0;
        for o in &cands {
            if o.index == e.index {
                nbrs += 1;
                continue;
            }
            if e.cube.overlaps(&o.cube) {
                disjoint = false;
            }
            let meet = e.cube.intersects(&o.cube);
            if meet {
                let ratio = e.cube.diameter() / o.cube.diameter();
                c2 = c2.max(ratio.max(1.0 / ratio));
            }
            let meet3 = e3.intersects(&o.cube.star(kappa, 3));
            if meet3 {
                nbrs += 1;
            }
            if meet != meet3 {
                equiv = false;
            }
        }
        (disjoint, c1, c2, equiv, nbrs)
    });
    let pts: Vec<Vec<f64>> = (0..points).map(|_| sample_point(&mut rng)).collect();
    let pstats: Vec<(bool, usize, f64, bool)> = crate::par::map(&pts, |x| {
        let host = match cov.locate(x) {
            Ok(h) => h,
            Err(_) => return (false, 0, f64::INFINITY, false),
        };
        let covered = host.cube.contains(x);
        let nbrs = cov.neighbors(&host.cube).unwrap_or_default();
        let overlap = nbrs.iter().filter(|e| e.cube.star(kappa, 3).contains(x)).count();
        let (err, support) = match cov.partition_of_unity(x) {
            Ok(terms) => {
                let s: f64 = terms.iter().map(|t| t.1).sum();
                let ok = terms
                    .iter()
                    .all(|(e, v)| *v >= 0.0 && *v <= 1.0 + 1e-15 && e.cube.star(kappa, 1).contains(x));
                ((s - 1.0).abs(), ok)
            }
            Err(_) => (f64::INFINITY, false),
        };
        (covered, overlap, err, support)
    });
    let axiom1 = pstats.iter().all(|s| s.0);
    let axiom2 = stats.iter().all(|s| s.0);
    let c1 = stats.iter().map(|s| s.1).fold(1.0, f64::max);
    let c2 = stats.iter().map(|s| s.2).fold(1.0, f64::max);
    let equiv = stats.iter().all(|s| s.3);
    let max_nbrs = stats.iter().map(|s| s.4).max().unwrap_or(0);
    let overlap = pstats.iter().map(|s| s.1).max().unwrap_or(0);
    let pou_err = pstats.iter().map(|s| s.2).fold(0.0, f64::max);
    let support = pstats.iter().all(|s| s.3);
    let pass = axiom1 && axiom2 && equiv && c1.is_finite() && c2.is_finite() && pou_err <= 1e-12 && support;
    Ok(CoveringReport {
        covering: cov.name(),
        kappa,
        elements_checked: elements.len(),
        points_sampled: points,
        axiom1_covered: axiom1,
        axiom2_disjoint: axiom2,
        c1_shape: c1,
        c2_neighbor_ratio: c2,
        equivalence_star3: equiv,
        max_overlap_star3: overlap,
        max_neighbors: max_nbrs,
        pou_max_error: pou_err,
        pou_support_ok: support,
        pass,
    })
}
