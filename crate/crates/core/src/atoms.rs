//! Atoms of the local Hardy space attached to an admissible covering.
//!
//! Atoms are piecewise constant on depth-`m` dyadic children of their host
//! cuboid. Decomposition localizes with a discrete partition of unity, removes
//! the mean on each host (the local atom) and expands the remainder in a
//! measure-weighted Haar basis (the cancellative atoms).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::covering::{Covering, Cuboid, Element, Window};
use crate::error::{check_dims, Error, Result};
use crate::func::{Cell, CellFunction};
use crate::measure::{interval_weight, measure_box, Flavor, NuVector};

const BOX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomKind {
    Local,
    Cancellative,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub kind: AtomKind,
    pub host: Element,
    /// The box `K` carrying the support; equal to the host for local atoms.
    pub support: Cuboid,
    pub cells: CellFunction,
}

impl Atom {
    /// `μ(Q)^{-1} 1_Q`.
    pub fn local(host: Element, nu: &[f64]) -> Self {
        let m = measure_box(nu, host.cube.lower(), host.cube.upper());
        let cells = CellFunction::indicator(&host.cube, 1.0 / m);
        Atom { kind: AtomKind::Local, support: host.cube.clone(), host, cells }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        if !self.support.contains(x) {
            return 0.0;
        }
        self.cells.eval(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub lambda: f64,
    pub atom: Atom,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub terms: Vec<Term>,
    pub total_l1: f64,
    pub depth: u32,
}

impl Decomposition {
    fn from_terms(terms: Vec<Term>, depth: u32) -> Self {
        let total_l1 = terms.iter().map(|t| t.lambda.abs()).sum();
        Decomposition { terms, total_l1, depth }
    }

    /// `Σ λ_k a_k(x)`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.lambda * t.atom.eval(x)).sum()
    }

    pub fn count(&self, kind: AtomKind) -> usize {
        self.terms.iter().filter(|t| t.atom.kind == kind).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: String,
    pub detail: String,
}

/// Measured quantities of an atom and every failed requirement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomCertificate {
    pub valid: bool,
    pub kind: AtomKind,
    pub support_lower: Vec<f64>,
    pub support_upper: Vec<f64>,
    /// `‖a‖_∞ · μ(K)`; at most 1 for an atom.
    pub size: f64,
    pub integral: f64,
    pub violations: Vec<Violation>,
}

fn inside(lo: &[f64], hi: &[f64], outer: &Cuboid) -> bool {
    outer.contains_box(lo, hi)
}

/// Check every requirement of a local or cancellative atom.
pub fn validate_atom(a: &Atom, cov: &Covering, nu: &NuVector) -> AtomCertificate {
    let nus = nu.effective();
    let mut violations = Vec::new();
    let mut push = |kind: &str, detail: String| violations.push(Violation { kind: kind.into(), detail });
    if nu.dim() != a.host.cube.dim() || cov.dim() != a.host.cube.dim() {
        push("dimension", format!("atom has dimension {}", a.host.cube.dim()));
        return AtomCertificate {
            valid: false,
            kind: a.kind,
            support_lower: a.support.lower().to_vec(),
            support_upper: a.support.upper().to_vec(),
            size: f64::NAN,
            integral: f64::NAN,
            violations,
        };
    }
    match cov.element(&a.host.index) {
        Ok(e) if e.cube.contains_box(a.host.cube.lower(), a.host.cube.upper())
            && a.host.cube.contains_box(e.cube.lower(), e.cube.upper()) => {}
        _ => push("host", format!("index {:?} does not name this cuboid", a.host.index)),
    }
    let mk = measure_box(&nus, a.support.lower(), a.support.upper());
    let size = a.cells.sup_abs() * mk;
    let integral = a.cells.integral(&nus);
    match a.kind {
        AtomKind::Local => {
            let mq = measure_box(&nus, a.host.cube.lower(), a.host.cube.upper());
            let shape_ok = a.cells.cells.len() == 1
                && inside(&a.cells.cells[0].lower, &a.cells.cells[0].upper, &a.host.cube)
                && a.host.cube.contains_box(&a.cells.cells[0].lower, &a.cells.cells[0].upper)
                && a.host.cube.contains_box(a.support.lower(), a.support.upper())
                && a.support.contains_box(a.host.cube.lower(), a.host.cube.upper())
                && {
                    let c = &a.cells.cells[0];
                    c.lower.iter().zip(a.host.cube.lower()).all(|(x, y)| (x - y).abs() <= BOX_TOL * y.abs().max(1.0))
                        && c.upper.iter().zip(a.host.cube.upper()).all(|(x, y)| (x - y).abs() <= BOX_TOL * y.abs().max(1.0))
                };
            if !shape_ok {
                push("local-shape", "local atom must be constant on its host".into());
            } else if (a.cells.cells[0].value * mq - 1.0).abs() > BOX_TOL {
                push("size", format!("local atom value times mu(Q) is {}", a.cells.cells[0].value * mq));
            }
        }
        AtomKind::Cancellative => {
            let star = a.host.cube.star(cov.kappa(), 1);
            if !inside(a.support.lower(), a.support.upper(), &star) {
                push("support", "K is not contained in Q*".into());
            }
            if let Some(c) = a.cells.cells.iter().find(|c| c.value != 0.0 && !inside(&c.lower, &c.upper, &a.support)) {
                push("support", format!("cell {:?}..{:?} leaves K", c.lower, c.upper));
            }
            if !mk.is_finite() {
                push("support", "K has infinite measure".into());
            }
            if size > 1.0 + BOX_TOL {
                push("size", format!("sup|a| mu(K) = {size}"));
            }
            if integral.abs() > 1e-10 {
                push("cancellation", format!("integral is {integral:e}"));
            }
        }
    }
    AtomCertificate {
        valid: violations.is_empty(),
        kind: a.kind,
        support_lower: a.support.lower().to_vec(),
        support_upper: a.support.upper().to_vec(),
        size,
        integral,
        violations,
    }
}

fn cell_in(c: &Cell, q: &Cuboid) -> bool {
    q.contains_box(&c.lower, &c.upper)
}

/// `λ₀ = ∫ f dμ` and `g = f − λ₀ μ(Q)^{-1} 1_Q`.
///
/// The cells of `f` must lie in `Q*` and those inside `Q` must tile it.
pub fn mean_split(f: &CellFunction, q: &Cuboid, kappa: f64, nu: &NuVector) -> Result<(f64, CellFunction)> {
    check_dims(q.dim(), f.dim)?;
    check_dims(q.dim(), nu.dim())?;
    let nus = nu.effective();
    let star = q.star(kappa, 1);
    if let Some(c) = f.cells.iter().find(|c| c.value != 0.0 && !cell_in(c, &star)) {
        return Err(Error::Support(format!("cell {:?}..{:?} is outside Q*", c.lower, c.upper)));
    }
    let mq = measure_box(&nus, q.lower(), q.upper());
    let inner: f64 = f.cells.iter().filter(|c| cell_in(c, q)).map(|c| c.measure(&nus)).sum();
    if (inner - mq).abs() > 1e-10 * mq {
        return Err(Error::Precondition("cells inside Q must tile Q".into()));
    }
    let lambda0 = f.integral(&nus);
    let shift = lambda0 / mq;
    let cells = f
        .cells
        .iter()
        .map(|c| {
            let v = if cell_in(c, q) { c.value - shift } else { c.value };
            Cell { value: v, ..c.clone() }
        })
        .collect();
    Ok((lambda0, CellFunction { dim: f.dim, cells }))
}

fn bbox(cells: &[Cell], idx: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let d = cells[idx[0]].lower.len();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for &i in idx {
        for k in 0..d {
            lo[k] = lo[k].min(cells[i].lower[k]);
            hi[k] = hi[k].max(cells[i].upper[k]);
        }
    }
    (lo, hi)
}

/// Expand a mean-zero piecewise-constant `g` hosted on `host` into cancellative atoms.
///
/// Cells are split recursively at the midpoint of the longest side of their
/// bounding box; each split contributes the martingale difference between the
/// child averages and the parent average.
pub fn haar_decompose(g: &CellFunction, host: &Element, nu: &NuVector, kappa: f64, depth: u32) -> Result<Decomposition> {
    haar_scaled(g, host, nu, kappa, depth, 0.0)
}

/// As [`haar_decompose`], with the mean-zero tolerance measured against `max(‖g‖₁, scale)`.
fn haar_scaled(g: &CellFunction, host: &Element, nu: &NuVector, kappa: f64, depth: u32, scale: f64) -> Result<Decomposition> {
    check_dims(host.cube.dim(), g.dim)?;
    let nus = nu.effective();
    let cells = &g.cells;
    if cells.is_empty() || g.sup_abs() == 0.0 {
        return Ok(Decomposition::from_terms(vec![], depth));
    }
    let mass: Vec<f64> = cells.iter().map(|c| c.measure(&nus)).collect();
    if mass.iter().any(|m| !m.is_finite()) {
        return Err(Error::Support("cells must have finite measure".into()));
    }
    let l1: f64 = cells.iter().zip(&mass).map(|(c, m)| c.value.abs() * m).sum();
    let total: f64 = cells.iter().zip(&mass).map(|(c, m)| c.value * m).sum();
    if total.abs() > 1e-10 * l1.max(scale).max(f64::MIN_POSITIVE) {
        return Err(Error::Precondition(format!("input is not mean-zero: integral {total:e}")));
    }
    let star = host.cube.star(kappa, 1);
    let scale = g.sup_abs();
    let mut terms = Vec::new();
    let mut stack: Vec<Vec<usize>> = vec![(0..cells.len()).collect()];
    while let Some(node) = stack.pop() {
        if node.len() < 2 {
            continue;
        }
        let (lo, hi) = bbox(cells, &node);
        let axis = (0..lo.len()).max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b]))).unwrap_or(0);
        let mid = 0.5 * (lo[axis] + hi[axis]);
        let center = |i: usize| 0.5 * (cells[i].lower[axis] + cells[i].upper[axis]);
        let (mut left, mut right): (Vec<usize>, Vec<usize>) = node.iter().partition(|&&i| center(i) < mid);
        if left.is_empty() || right.is_empty() {
            let mut sorted = node.clone();
            sorted.sort_by(|&a, &b| center(a).total_cmp(&center(b)));
            right = sorted.split_off(sorted.len() / 2);
            left = sorted;
        }
        let stats = |part: &[usize]| -> (f64, f64) {
            part.iter().fold((0.0, 0.0), |(s, m), &i| (s + cells[i].value * mass[i], m + mass[i]))
        };
        let (sl, ml) = stats(&left);
        let (sr, mr) = stats(&right);
        let avg = (sl + sr) / (ml + mr);
        let dl = sl / ml - avg;
        let dr = sr / mr - avg;
        let sup = dl.abs().max(dr.abs());
        if sup > 1e-15 * scale {
            let mk = measure_box(&nus, &lo, &hi);
            let lambda = sup * mk;
            let mut acells = Vec::with_capacity(node.len());
            for (part, d) in [(&left, dl), (&right, dr)] {
                for &i in part.iter() {
                    acells.push(Cell { value: d / lambda, ..cells[i].clone() });
                }
            }
            let support = Cuboid::new(lo.clone(), hi.clone())?;
            if !star.contains_box(&lo, &hi) {
                return Err(Error::Support("cells of g leave Q*".into()));
            }
            terms.push(Term {
                lambda,
                atom: Atom {
                    kind: AtomKind::Cancellative,
                    host: host.clone(),
                    support,
                    cells: CellFunction { dim: g.dim, cells: acells },
                },
            });
        }
        stack.push(right);
        stack.push(left);
    }
    Ok(Decomposition::from_terms(terms, depth))
}

/// Depth-`m` dyadic children of a cuboid, row-major with the last axis fastest.
pub fn dyadic_children(q: &Cuboid, depth: u32) -> Vec<Cell> {
    let n = 1usize << depth;
    let d = q.dim();
    let edges: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            let (a, b) = (q.lower()[k], q.upper()[k]);
            (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect()
        })
        .collect();
    let shape = vec![n; d];
    (0..n.pow(d as u32))
        .map(|flat| {
            let idx = crate::func::unflatten(flat, &shape);
            Cell {
                lower: idx.iter().enumerate().map(|(k, &i)| edges[k][i]).collect(),
                upper: idx.iter().enumerate().map(|(k, &i)| edges[k][i + 1]).collect(),
                value: 0.0,
            }
        })
        .collect()
}

/// Levels of extra refinement allowed when a child still straddles cells of the input.
const MAX_REFINE: u32 = 12;

/// Overlap of positive width, ignoring slivers at the rounding level of `[lo, hi]`.
fn overlaps(c: &Cell, lo: &[f64], hi: &[f64]) -> bool {
    (0..lo.len()).all(|k| c.upper[k].min(hi[k]) - c.lower[k].max(lo[k]) > 1e-12 * (hi[k] - lo[k]))
}

fn covers(c: &Cell, lo: &[f64], hi: &[f64]) -> bool {
    (0..lo.len()).all(|k| {
        let s = 1e-12 * (hi[k] - lo[k]);
        c.lower[k] <= lo[k] + s && c.upper[k] >= hi[k] - s
    })
}

/// Depth-`depth` children of `q`, split further until `f` is constant on each.
fn resolved_children(q: &Cuboid, f: &CellFunction, depth: u32) -> Vec<Cell> {
    let nonzero: Vec<&Cell> = f.cells.iter().filter(|c| c.value != 0.0 && overlaps(c, q.lower(), q.upper())).collect();
    let mut out = Vec::new();
    let mut stack: Vec<(Cell, u32)> = dyadic_children(q, depth).into_iter().rev().map(|c| (c, 0)).collect();
    while let Some((child, extra)) = stack.pop() {
        let hits: Vec<&&Cell> = nonzero.iter().filter(|c| overlaps(c, &child.lower, &child.upper)).collect();
        let uniform = hits.is_empty() || (hits.len() == 1 && covers(hits[0], &child.lower, &child.upper));
        if uniform || extra >= MAX_REFINE {
            out.push(child);
            continue;
        }
        match Cuboid::new(child.lower.clone(), child.upper.clone()) {
            Ok(cube) => stack.extend(dyadic_children(&cube, 1).into_iter().rev().map(|c| (c, extra + 1))),
            Err(_) => out.push(child),
        }
    }
    out
}

struct Piece {
    target: Vec<i64>,
    host: Vec<i64>,
    child: usize,
    cell: Cell,
}

/// Localized decomposition `f = Σ_Q (λ_Q μ(Q)^{-1} 1_Q + Σ λ a)`.
///
/// `f` is resampled at the centres of the depth-`m` children of the covering
/// elements meeting its support, so the result reconstructs `f` exactly
/// whenever `f` is constant on those children.
pub fn localize_and_decompose(
    f: &CellFunction,
    cov: &Covering,
    nu: &NuVector,
    depth: u32,
    window: &Window,
) -> Result<Decomposition> {
    check_dims(cov.dim(), f.dim)?;
    check_dims(cov.dim(), nu.dim())?;
    let nus = nu.effective();
    let kappa = cov.kappa();
    let Some((lo, hi)) = f.support_box() else {
        return Ok(Decomposition::from_terms(vec![], depth));
    };
    for c in f.cells.iter().filter(|c| c.value != 0.0) {
        let e = cov.locate(&c.center())?;
        if cov.levels(&e.index).iter().any(|&n| !window.contains(n)) {
            return Err(Error::Window(format!(
                "support near {:?} needs levels {:?} outside the window",
                c.center(),
                cov.levels(&e.index)
            )));
        }
    }
    let hosts: Vec<Element> = cov
        .elements_in_box(&lo, &hi, window)?
        .into_iter()
        .filter(|e| (0..f.dim).all(|k| e.cube.lower()[k] < hi[k] && e.cube.upper()[k] > lo[k]))
        .collect();
    let per_host: Vec<Result<Vec<Piece>>> = crate::par::map(&hosts, |h| {
        let local: Vec<&Cell> = f.cells.iter().filter(|c| c.value != 0.0 && h.cube.intersects_box(&c.lower, &c.upper)).collect();
        if local.is_empty() {
            return Ok(vec![]);
        }
        let nbrs = cov.neighbors(&h.cube)?;
        let stars: Vec<Cuboid> = nbrs.iter().map(|e| e.cube.star(kappa, 1)).collect();
        let mut out = Vec::new();
        for (ci, mut child) in resolved_children(&h.cube, f, depth).into_iter().enumerate() {
            let x = child.center();
            let v = local.iter().find(|c| c.contains(&x)).map_or(0.0, |c| c.value);
            if v == 0.0 {
                continue;
            }
            let mut w: Vec<f64> = nbrs
                .iter()
                .zip(&stars)
                .map(|(e, s)| if s.contains_box(&child.lower, &child.upper) { cov.bump(&e.cube, &x) } else { 0.0 })
                .collect();
            let own = nbrs.iter().position(|e| e.index == h.index).expect("host is its own neighbour");
            w[own] = w[own].max(1.0);
            let total: f64 = w.iter().sum();
            let mut others = 0.0;
            for (k, wk) in w.iter_mut().enumerate() {
                *wk /= total;
                if k != own {
                    others += *wk;
                }
            }
            w[own] = 1.0 - others;
            for (k, e) in nbrs.iter().enumerate() {
                if w[k] != 0.0 {
                    child.value = w[k] * v;
                    out.push(Piece { target: e.index.clone(), host: h.index.clone(), child: ci, cell: child.clone() });
                }
            }
        }
        Ok(out)
    });
    let mut by_target: BTreeMap<Vec<i64>, Vec<Piece>> = BTreeMap::new();
    for r in per_host {
        for p in r? {
            by_target.entry(p.target.clone()).or_default().push(p);
        }
    }
    let groups: Vec<(Vec<i64>, Vec<Piece>)> = by_target.into_iter().collect();
    let parts: Vec<Result<Vec<Term>>> = crate::par::map(&groups, |(index, pieces)| {
        let q = cov.element(index)?;
        let mut cells = resolved_children(&q.cube, f, depth);
        let mut foreign = Vec::new();
        for p in pieces {
            if p.host == *index {
                cells[p.child].value += p.cell.value;
            } else {
                foreign.push(p.cell.clone());
            }
        }
        cells.extend(foreign);
        let fq = CellFunction { dim: f.dim, cells };
        let (lambda0, g) = mean_split(&fq, &q.cube, kappa, nu)?;
        let mut terms = Vec::new();
        if lambda0 != 0.0 {
            terms.push(Term { lambda: lambda0, atom: Atom::local(q.clone(), &nus) });
        }
        let scale = fq.l1(&nus);
        let g = g.pruned();
        terms.extend(haar_scaled(&g, &q, nu, kappa, depth, scale)?.terms);
        Ok(terms)
    });
    let mut terms = Vec::new();
    for p in parts {
        terms.extend(p?);
    }
    Ok(Decomposition::from_terms(terms, depth))
}

/// An atom transported to the exotic measure by `a(y) = ã(y) ∏ y_k^{4ν_e}` over exotic axes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugatedAtom {
    pub source: Atom,
    pub exotic_axes: Vec<(usize, f64)>,
    /// Range of `∏ y_k^{4ν_e} μ_{−ν_e}(K_k)/μ_{ν_e}(K_k)` over `y ∈ K`.
    pub factor_min: f64,
    pub factor_max: f64,
    /// `∫ a dμ` for the exotic measure.
    pub integral: f64,
    /// `sup |a| · μ(K)` for the exotic measure.
    pub size: f64,
}

impl ConjugatedAtom {
    pub fn eval(&self, y: &[f64]) -> f64 {
        let w: f64 = self.exotic_axes.iter().map(|&(k, e)| y[k].powf(4.0 * e)).product();
        self.source.eval(y) * w
    }
}

/// Range of `y^{4ν_e} μ_{−ν_e}([a,b]) / μ_{ν_e}([a,b])` over `y ∈ [a, b]`.
pub fn conjugation_factor_range(nu_e: f64, a: f64, b: f64) -> (f64, f64) {
    let r = interval_weight(-nu_e, a, b) / interval_weight(nu_e, a, b);
    (a.powf(4.0 * nu_e) * r, b.powf(4.0 * nu_e) * r)
}

/// Transport an atom of `μ_{(ν_c, ν_e)}` to `μ_{(ν_c, −ν_e)}`. `nu` carries the flavors.
pub fn conjugate_atom(a: &Atom, nu: &NuVector, cov: &Covering) -> Result<ConjugatedAtom> {
    check_dims(nu.dim(), a.host.cube.dim())?;
    match cov.element(&a.host.index) {
        Ok(e) if e.cube == a.host.cube => {}
        _ => return Err(Error::Support("host is not an element of the covering".into())),
    }
    let exotic: Vec<(usize, f64)> = nu
        .axes
        .iter()
        .enumerate()
        .filter(|(_, ax)| ax.flavor == Flavor::Exotic)
        .map(|(k, ax)| (k, ax.nu))
        .collect();
    let k = &a.support;
    let (mut fmin, mut fmax) = (1.0, 1.0);
    for &(ax, e) in &exotic {
        let (lo, hi) = conjugation_factor_range(e, k.lower()[ax], k.upper()[ax]);
        fmin *= lo;
        fmax *= hi;
    }
    // measure of ã · y^{4ν_e} against y^{1−2ν_e} equals that of ã against y^{1+2ν_e}
    let plus: Vec<f64> = nu.axes.iter().map(|ax| ax.nu).collect();
    let minus = nu.effective();
    let integral = a.cells.integral(&plus);
    let wmax: f64 = exotic.iter().map(|&(ax, e)| k.upper()[ax].powf(4.0 * e)).product();
    let size = a.cells.sup_abs() * wmax * measure_box(&minus, k.lower(), k.upper());
    Ok(ConjugatedAtom { source: a.clone(), exotic_axes: exotic, factor_min: fmin, factor_max: fmax, integral, size })
}
