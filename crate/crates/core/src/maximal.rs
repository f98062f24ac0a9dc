//! Semigroup actions on piecewise-constant functions, maximal functions over
//! a logarithmic time grid, and `L¹` norms of maximal functions.
//!
//! A grid function is a tensor of cell values, so `T_t f(x)` is a contraction of
//! that tensor with one table of per-axis kernel integrals per axis. The tables
//! are computed once for every outer node and time, then swept per node.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::func::GridFunction;
use crate::kernel::{AxisKernel, Branch, KernelSpec};
use crate::measure::{Flavor, NuVector};
use crate::quad::{adaptive_with_breaks, integrate_tensor, tanh_sinh, AxisMesh, Grading, MeshIntegral, QuadResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Adaptive Gauss–Kronrod panels, tanh-sinh only on segments touching 0.
    GaussKronrod,
    TanhSinh,
}

/// Log-spaced times `[lo_rel s², hi_rel s²]` for a length scale `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimeGrid {
    pub lo_rel: f64,
    pub hi_rel: f64,
    pub per_decade: u32,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid { lo_rel: 1e-6, hi_rel: 1e6, per_decade: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    /// Relative tolerance of every per-cell kernel integral.
    pub panel_tol: f64,
    /// Kernel integrals are truncated where the Gaussian factor drops below this.
    pub eps_tail: f64,
    pub times: TimeGrid,
    pub max_panels: usize,
    /// Outer meshes for `L¹` norms.
    pub grading: Grading,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            scheme: Scheme::GaussKronrod,
            panel_tol: 1e-9,
            eps_tail: 1e-10,
            times: TimeGrid::default(),
            max_panels: 400,
            grading: Grading { min_rel_width: 1e-2, tail_panels: 14, zero_panels: 20, max_rel_width: 0.5 },
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let t = &self.times;
        let g = &self.grading;
        let checks = [
            (self.panel_tol > 0.0 && self.panel_tol <= 1e-2, "panel_tol must lie in (0, 1e-2]"),
            (self.eps_tail > 0.0 && self.eps_tail <= 1e-3, "eps_tail must lie in (0, 1e-3]"),
            (t.lo_rel > 0.0 && t.hi_rel > t.lo_rel && t.hi_rel.is_finite(), "time grid needs 0 < lo_rel < hi_rel"),
            (t.per_decade >= 1, "time grid needs at least one point per decade"),
            (self.max_panels >= 1, "max_panels must be positive"),
            (g.min_rel_width > 0.0 && g.min_rel_width < 1.0, "grading.min_rel_width must lie in (0, 1)"),
            (g.max_rel_width > 0.0 && g.max_rel_width <= 1.0, "grading.max_rel_width must lie in (0, 1]"),
            (g.tail_panels >= 2, "grading.tail_panels must be at least 2"),
            (g.zero_panels >= 2, "grading.zero_panels must be at least 2"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::Config((*msg).into())),
            None => Ok(()),
        }
    }
}

/// `lo·(hi/lo)^{i/n}` with `n` chosen from the density; always contains both ends.
pub fn log_grid(lo: f64, hi: f64, per_decade: u32) -> Vec<f64> {
    if !(hi > lo) {
        return vec![hi.max(lo)];
    }
    let n = (((hi / lo).log10() * per_decade as f64).ceil() as usize).max(1);
    (0..=n).map(|i| if i == n { hi } else { lo * (hi / lo).powf(i as f64 / n as f64) }).collect()
}

/// One axis of the integrand: `kernel(t, x, y) · y^power`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct AxisFactor {
    kernel: AxisKernel,
    power: f64,
}

impl AxisFactor {
    fn new(kernel: AxisKernel, extra: f64) -> Self {
        AxisFactor { kernel, power: 2.0 * kernel.measure_nu() + 1.0 + extra }
    }
}

fn zero_result() -> QuadResult {
    QuadResult { value: 0.0, error: 0.0, evals: 0, converged: true }
}

fn axis_integral(f: &AxisFactor, t: f64, x: f64, a: f64, b: f64, q: &QuadratureSpec) -> QuadResult {
    let r = 2.0 * (t * ((1.0 / q.eps_tail).ln() + 8.0)).sqrt();
    let lo = a.max(x - r);
    let hi = b.min(x + r);
    if !(hi > lo) {
        return zero_result();
    }
    let g = |y: f64| f.kernel.eval(t, x, y) * y.powf(f.power);
    let mut res = if q.scheme == Scheme::TanhSinh || lo == 0.0 {
        let mid = if x > lo && x < hi { x } else { hi };
        let mut r = tanh_sinh(g, lo, mid, q.panel_tol);
        if mid < hi {
            let s = adaptive_with_breaks(g, mid, hi, &[], 1e-300, q.panel_tol, q.max_panels);
            r.value += s.value;
            r.error += s.error;
            r.evals += s.evals;
            r.converged &= s.converged;
        }
        r
    } else {
        adaptive_with_breaks(g, lo, hi, &[x], 1e-300, q.panel_tol, q.max_panels)
    };
    res.error += q.eps_tail * res.value.abs();
    res
}

fn checked(r: QuadResult, q: &QuadratureSpec) -> Result<QuadResult> {
    if r.converged {
        Ok(r)
    } else {
        let achieved = if r.value != 0.0 { r.error / r.value.abs() } else { r.error };
        Err(Error::Quadrature { achieved, requested: q.panel_tol })
    }
}

/// Per-axis vectors of kernel integrals over the grid intervals at one point.
fn point_tables(factors: &[AxisFactor], f: &GridFunction, t: f64, x: &[f64], q: &QuadratureSpec) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let mut vals = Vec::with_capacity(factors.len());
    let mut errs = Vec::with_capacity(factors.len());
    for (k, fac) in factors.iter().enumerate() {
        let e = &f.edges[k];
        let mut v = Vec::with_capacity(e.len() - 1);
        let mut er = Vec::with_capacity(e.len() - 1);
        for w in e.windows(2) {
            let r = checked(axis_integral(fac, t, x[k], w[0], w[1], q), q)?;
            v.push(r.value);
            er.push(r.error);
        }
        vals.push(v);
        errs.push(er);
    }
    Ok((vals, errs))
}

/// `Σ_i V[i] ∏_k a_k[i_k]` over a row-major tensor.
fn contract(values: &[f64], vecs: &[&[f64]]) -> f64 {
    match vecs.len() {
        0 => values[0],
        1 => values.iter().zip(vecs[0]).map(|(v, a)| v * a).sum(),
        _ => {
            let n0 = vecs[0].len();
            let rest = values.len() / n0;
            let mut partial = vec![0.0; rest];
            for (i, &a) in vecs[0].iter().enumerate() {
                if a != 0.0 {
                    for (p, v) in partial.iter_mut().zip(&values[i * rest..(i + 1) * rest]) {
                        *p += a * v;
                    }
                }
            }
            contract(&partial, &vecs[1..])
        }
    }
}

/// Value and an error bound obtained by propagating the per-axis errors.
fn contract_with_error(values: &[f64], vals: &[Vec<f64>], errs: &[Vec<f64>]) -> (f64, f64) {
    let v: Vec<&[f64]> = vals.iter().map(Vec::as_slice).collect();
    let value = contract(values, &v);
    let abs_v: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    let lo: Vec<Vec<f64>> = vals.iter().map(|a| a.iter().map(|x| x.abs()).collect()).collect();
    let hi: Vec<Vec<f64>> = lo.iter().zip(errs).map(|(a, e)| a.iter().zip(e).map(|(x, y)| x + y).collect()).collect();
    let lo_r: Vec<&[f64]> = lo.iter().map(Vec::as_slice).collect();
    let hi_r: Vec<&[f64]> = hi.iter().map(Vec::as_slice).collect();
    (value, (contract(&abs_v, &hi_r) - contract(&abs_v, &lo_r)).max(0.0))
}

fn factors_of(spec: &KernelSpec, extra: &[f64]) -> Vec<AxisFactor> {
    spec.axes.iter().zip(extra).map(|(&k, &e)| AxisFactor::new(k, e)).collect()
}

fn check_point(spec: &KernelSpec, f: &GridFunction, x: &[f64]) -> Result<()> {
    check_dims(spec.dim(), f.dim())?;
    check_dims(spec.dim(), x.len())?;
    if x.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::domain("evaluation point must lie in the open orthant"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointValue {
    pub value: f64,
    pub error: f64,
}

/// `∫ T_t(x, y) f(y) dμ(y)` with `μ` the measure of the kernel's axes.
pub fn apply_semigroup(spec: &KernelSpec, t: f64, f: &GridFunction, x: &[f64], q: &QuadratureSpec) -> Result<PointValue> {
    check_point(spec, f, x)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    let factors = factors_of(spec, &vec![0.0; spec.dim()]);
    let (vals, errs) = point_tables(&factors, f, t, x, q)?;
    let (value, error) = contract_with_error(&f.values, &vals, &errs);
    Ok(PointValue { value, error })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaximalPoint {
    pub value: f64,
    pub argmax_t: f64,
    pub error: f64,
}

fn support(f: &GridFunction) -> Result<(Vec<f64>, Vec<f64>)> {
    let cells = f.to_cells();
    cells.support_box().ok_or_else(|| Error::Support("function vanishes identically".into()))
}

fn time_grid(f: &GridFunction, q: &QuadratureSpec, cap: Option<f64>, reach: f64) -> Result<(Vec<f64>, f64)> {
    let (lo, hi) = support(f)?;
    let s2: f64 = lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum();
    let t_lo = q.times.lo_rel * s2;
    let mut t_hi = (q.times.hi_rel * s2).max((2.0 * reach).powi(2));
    if let Some(c) = cap {
        if !(c > 0.0) {
            return Err(Error::domain("time cap must be positive"));
        }
        t_hi = t_hi.min(c);
    }
    Ok((log_grid(t_lo.min(t_hi), t_hi, q.times.per_decade), s2))
}

/// `max_t |T_t f(x)|` over the time grid, optionally restricted to `t ≤ t_cap`.
pub fn maximal_function(spec: &KernelSpec, f: &GridFunction, x: &[f64], q: &QuadratureSpec, t_cap: Option<f64>) -> Result<MaximalPoint> {
    check_point(spec, f, x)?;
    q.validate()?;
    let reach = x.iter().cloned().fold(0.0, f64::max);
    let (times, _) = time_grid(f, q, t_cap, reach)?;
    let factors = factors_of(spec, &vec![0.0; spec.dim()]);
    let mut best = MaximalPoint { value: -1.0, argmax_t: times[0], error: 0.0 };
    for &t in &times {
        let (vals, errs) = point_tables(&factors, f, t, x, q)?;
        let (v, e) = contract_with_error(&f.values, &vals, &errs);
        if v.abs() > best.value {
            best = MaximalPoint { value: v.abs(), argmax_t: t, error: e };
        }
    }
    Ok(best)
}

/// Outer mesh of `(0, ∞)` for one axis: a run toward 0, graded panels across the
/// support with refinement at every grid edge, and a run toward ∞.
pub fn outer_mesh(edges: &[f64], g: &Grading) -> AxisMesh {
    let a = edges[0];
    let b = edges[edges.len() - 1];
    let l = b - a;
    let mut m = AxisMesh::empty();
    m.add_to_zero(0.5 * a, g);
    m.add_graded(0.5 * a, b + l, edges, [false, false], g);
    m.add_to_infinity(b + l, g);
    m
}

/// `∫ |g| dμ_ν` for nodal values on unweighted meshes.
pub fn l1_norm(values: &[f64], meshes: &[&AxisMesh], nu: &[f64]) -> Result<MeshIntegral> {
    check_dims(meshes.len(), nu.len())?;
    check_dims(meshes.iter().map(|m| m.len()).product(), values.len())?;
    let weighted: Vec<AxisMesh> = meshes
        .iter()
        .zip(nu)
        .map(|(m, &n)| (*m).clone().weighted(|x| x.powf(2.0 * n + 1.0)))
        .collect();
    let refs: Vec<&AxisMesh> = weighted.iter().collect();
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    Ok(integrate_tensor(&refs, &abs))
}

/// Table of axis integrals `[node][time][interval]` with matching errors.
struct AxisTable {
    n_t: usize,
    n_int: usize,
    vals: Vec<f64>,
    errs: Vec<f64>,
}

impl AxisTable {
    fn row(&self, node: usize, ti: usize) -> &[f64] {
        let s = (node * self.n_t + ti) * self.n_int;
        &self.vals[s..s + self.n_int]
    }

    fn err_row(&self, node: usize, ti: usize) -> &[f64] {
        let s = (node * self.n_t + ti) * self.n_int;
        &self.errs[s..s + self.n_int]
    }
}

fn build_table(fac: &AxisFactor, edges: &[f64], nodes: &[f64], times: &[f64], q: &QuadratureSpec) -> Result<AxisTable> {
    let n_int = edges.len() - 1;
    let rows: Vec<Result<(Vec<f64>, Vec<f64>)>> = crate::par::map(nodes, |&x| {
        let mut v = Vec::with_capacity(times.len() * n_int);
        let mut e = Vec::with_capacity(times.len() * n_int);
        for &t in times {
            for w in edges.windows(2) {
                let r = checked(axis_integral(fac, t, x, w[0], w[1], q), q)?;
                v.push(r.value);
                e.push(r.error);
            }
        }
        Ok((v, e))
    });
    let mut vals = Vec::with_capacity(nodes.len() * times.len() * n_int);
    let mut errs = Vec::with_capacity(vals.capacity());
    for r in rows {
        let (v, e) = r?;
        vals.extend(v);
        errs.extend(e);
    }
    Ok(AxisTable { n_t: times.len(), n_int, vals, errs })
}

/// `T_t f` at every node tuple of `meshes[1..]` after fixing the first axis row.
fn sweep_rest(partial: &[f64], tables: &[AxisTable], sizes: &[usize], ti: usize, out: &mut Vec<f64>) {
    if tables.is_empty() {
        out.push(partial[0]);
        return;
    }
    let n0 = tables[0].n_int;
    let rest = partial.len() / n0;
    let mut next = vec![0.0; rest];
    for node in 0..sizes[0] {
        let row = tables[0].row(node, ti);
        next.iter_mut().for_each(|p| *p = 0.0);
        for (i, &a) in row.iter().enumerate() {
            if a != 0.0 {
                for (p, v) in next.iter_mut().zip(&partial[i * rest..(i + 1) * rest]) {
                    *p += a * v;
                }
            }
        }
        sweep_rest(&next, &tables[1..], &sizes[1..], ti, out);
    }
}

/// `L¹` norm of a maximal function together with its error split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximalL1 {
    pub kernel: String,
    pub value: f64,
    pub quad_error: f64,
    pub tail_error: f64,
    /// Integral of the per-node semigroup error bounds.
    pub pointwise_error: f64,
    pub error: f64,
    /// Number of outer nodes whose maximum sits at `t ≈ 10^k s²`, keyed by `k`.
    pub t_argmax_histogram: BTreeMap<i32, usize>,
    pub nodes: usize,
    pub times: usize,
}

/// Maximal function sampled on the outer meshes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximalProfile {
    pub axes: Vec<Vec<f64>>,
    /// Row-major over `axes`, last axis fastest.
    pub values: Vec<f64>,
}

struct Route<'a> {
    spec: &'a KernelSpec,
    extra: Vec<f64>,
    outer_nu: Vec<f64>,
}

fn maximal_l1_route(route: &Route, f: &GridFunction, q: &QuadratureSpec, t_cap: Option<f64>) -> Result<(MaximalL1, MaximalProfile)> {
    q.validate()?;
    let d = route.spec.dim();
    check_dims(d, f.dim())?;
    let (lo, hi) = support(f)?;
    if lo.iter().any(|&a| a <= 0.0) {
        return Err(Error::Support("function must vanish near the boundary of the orthant".into()));
    }
    let meshes: Vec<AxisMesh> = (0..d)
        .map(|k| {
            let mut e: Vec<f64> = f.edges[k].iter().cloned().filter(|&x| x >= lo[k] && x <= hi[k]).collect();
            e.dedup();
            outer_mesh(&e, &q.grading)
        })
        .collect();
    let reach = meshes.iter().map(AxisMesh::max_node).fold(0.0, f64::max);
    let (times, s2) = time_grid(f, q, t_cap, reach)?;
    let factors = factors_of(route.spec, &route.extra);
    let tables = factors
        .iter()
        .zip(&meshes)
        .enumerate()
        .map(|(k, (fac, m))| build_table(fac, &f.edges[k], &m.nodes, &times, q))
        .collect::<Result<Vec<_>>>()?;
    let sizes: Vec<usize> = meshes.iter().map(AxisMesh::len).collect();
    let shape = f.shape();
    let n0 = shape[0];
    let rest_cells = f.values.len() / n0;
    let per_first: Vec<(Vec<f64>, Vec<u32>)> = crate::par::map_range(sizes[0], |node| {
        let inner: usize = sizes[1..].iter().product();
        let mut best = vec![0.0f64; inner];
        let mut arg = vec![0u32; inner];
        let mut partial = vec![0.0; rest_cells];
        let mut out = Vec::with_capacity(inner);
        for ti in 0..times.len() {
            partial.iter_mut().for_each(|p| *p = 0.0);
            for (i, &a) in tables[0].row(node, ti).iter().enumerate() {
                if a != 0.0 {
                    for (p, v) in partial.iter_mut().zip(&f.values[i * rest_cells..(i + 1) * rest_cells]) {
                        *p += a * v;
                    }
                }
            }
            out.clear();
            sweep_rest(&partial, &tables[1..], &sizes[1..], ti, &mut out);
            for (j, v) in out.iter().enumerate() {
                if v.abs() > best[j] {
                    best[j] = v.abs();
                    arg[j] = ti as u32;
                }
            }
        }
        (best, arg)
    });
    let total: usize = sizes.iter().product();
    let mut values = Vec::with_capacity(total);
    let mut argmax = Vec::with_capacity(total);
    for (b, a) in per_first {
        values.extend(b);
        argmax.extend(a);
    }
    let errors: Vec<f64> = crate::par::map_range(total, |flat| {
        let idx = crate::func::unflatten(flat, &sizes);
        let ti = argmax[flat] as usize;
        let vals: Vec<Vec<f64>> = (0..d).map(|k| tables[k].row(idx[k], ti).to_vec()).collect();
        let errs: Vec<Vec<f64>> = (0..d).map(|k| tables[k].err_row(idx[k], ti).to_vec()).collect();
        contract_with_error(&f.values, &vals, &errs).1
    });
    let mesh_refs: Vec<&AxisMesh> = meshes.iter().collect();
    let main = l1_norm(&values, &mesh_refs, &route.outer_nu)?;
    if !main.tails_converge {
        return Err(Error::Quadrature { achieved: f64::INFINITY, requested: q.eps_tail });
    }
    let pointwise = l1_norm(&errors, &mesh_refs, &route.outer_nu)?.value;
    let mut hist = BTreeMap::new();
    for &ti in &argmax {
        let k = (times[ti as usize] / s2).log10().round() as i32;
        *hist.entry(k).or_insert(0) += 1;
    }
    let summary = MaximalL1 {
        kernel: route.spec.label(),
        value: main.value,
        quad_error: main.quad_error,
        tail_error: main.tail_error,
        pointwise_error: pointwise,
        error: main.quad_error + main.tail_error + pointwise,
        t_argmax_histogram: hist,
        nodes: total,
        times: times.len(),
    };
    let profile = MaximalProfile { axes: meshes.iter().map(|m| m.nodes.clone()).collect(), values };
    Ok((summary, profile))
}

/// `‖ max_t |T_t f| ‖_{L¹(μ)}` with `μ` the kernel's own measure.
pub fn maximal_l1(spec: &KernelSpec, f: &GridFunction, q: &QuadratureSpec, t_cap: Option<f64>) -> Result<(MaximalL1, MaximalProfile)> {
    let route = Route { spec, extra: vec![0.0; spec.dim()], outer_nu: spec.measure_nu() };
    maximal_l1_route(&route, f, q, t_cap)
}

/// Both routes to the Hardy norm. The conjugated route is present when some axis is exotic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H1Estimate {
    pub direct: MaximalL1,
    pub conjugated: Option<MaximalL1>,
    /// `|direct − conjugated|`.
    pub discrepancy: Option<f64>,
    /// Discrepancy within three times the summed error estimates.
    pub routes_agree: Option<bool>,
    #[serde(skip)]
    pub profile: MaximalProfile,
}

/// Hardy norm estimate of `f` for the semigroup implied by the flavors of `nu`.
///
/// `f` lives on `μ_{(ν_c, −ν_e)}`. The conjugated route integrates
/// `y₂^{-4ν_e} f` against `W^cls ⊗ K` and measures the result in `μ_{(ν_c, ν_e)}`.
pub fn h1_norm_estimate(f: &GridFunction, nu: &NuVector, q: &QuadratureSpec) -> Result<H1Estimate> {
    check_dims(nu.dim(), f.dim())?;
    let direct_spec = KernelSpec::semigroup(nu)?;
    let (direct, profile) = maximal_l1(&direct_spec, f, q, None)?;
    let exotic = nu.axes.iter().any(|a| a.flavor == Flavor::Exotic);
    let conjugated = if exotic {
        let spec = KernelSpec::conjugated(nu)?;
        let extra: Vec<f64> = spec
            .axes
            .iter()
            .map(|a| if a.branch == Branch::ConjugatedK { -4.0 * a.nu } else { 0.0 })
            .collect();
        let route = Route { spec: &spec, extra, outer_nu: spec.measure_nu() };
        Some(maximal_l1_route(&route, f, q, None)?.0)
    } else {
        None
    };
    let discrepancy = conjugated.as_ref().map(|c| (c.value - direct.value).abs());
    let routes_agree = conjugated.as_ref().map(|c| (c.value - direct.value).abs() <= 3.0 * (c.error + direct.error));
    Ok(H1Estimate { direct, conjugated, discrepancy, routes_agree, profile })
}

/// `‖T_t f‖_{L¹(μ)}` on the outer meshes at a single time.
pub fn semigroup_l1(spec: &KernelSpec, f: &GridFunction, t: f64, q: &QuadratureSpec) -> Result<MeshIntegral> {
    q.validate()?;
    let d = spec.dim();
    check_dims(d, f.dim())?;
    let meshes: Vec<AxisMesh> = (0..d).map(|k| outer_mesh(&f.edges[k], &q.grading)).collect();
    let factors = factors_of(spec, &vec![0.0; d]);
    let tables = factors
        .iter()
        .zip(&meshes)
        .enumerate()
        .map(|(k, (fac, m))| build_table(fac, &f.edges[k], &m.nodes, &[t], q))
        .collect::<Result<Vec<_>>>()?;
    let sizes: Vec<usize> = meshes.iter().map(AxisMesh::len).collect();
    let values: Vec<f64> = crate::par::map_range(sizes.iter().product(), |flat| {
        let idx = crate::func::unflatten(flat, &sizes);
        let rows: Vec<&[f64]> = (0..d).map(|k| tables[k].row(idx[k], 0)).collect();
        contract(&f.values, &rows)
    });
    let refs: Vec<&AxisMesh> = meshes.iter().collect();
    l1_norm(&values, &refs, &spec.measure_nu())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::Cuboid;
    use crate::measure::interval_weight;
    use proptest::prelude::{prop_assert, proptest, ProptestConfig};

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn step(a: f64, b: f64, v: f64) -> GridFunction {
        GridFunction::new(vec![vec![a, b]], vec![v]).unwrap()
    }

    fn cls(nu: f64) -> KernelSpec {
        KernelSpec::new(vec![AxisKernel::classical(nu).unwrap()])
    }

    #[test]
    fn approximate_identity_and_decay() {
        let f = step(1.0, 2.0, 1.0);
        let v = apply_semigroup(&cls(0.0), 1e-4, &f, &[1.5], &q()).unwrap();
        assert!((v.value - 1.0).abs() < 1e-3);
        let far = apply_semigroup(&cls(0.0), 1e8, &f, &[1.5], &q()).unwrap();
        assert!(far.value < 1e-7);
    }

    #[test]
    fn linearity() {
        let edges = vec![vec![1.0, 1.5, 2.0, 3.0]];
        let f = GridFunction::new(edges.clone(), vec![1.0, -2.0, 0.5]).unwrap();
        let g = GridFunction::new(edges.clone(), vec![0.3, 0.1, -1.0]).unwrap();
        let h = GridFunction::new(edges, vec![2.0 * 1.0 - 3.0 * 0.3, 2.0 * -2.0 - 3.0 * 0.1, 2.0 * 0.5 + 3.0]).unwrap();
        let s = cls(0.5);
        for t in [0.01, 0.3, 4.0] {
            let a = apply_semigroup(&s, t, &f, &[1.7], &q()).unwrap().value;
            let b = apply_semigroup(&s, t, &g, &[1.7], &q()).unwrap().value;
            let c = apply_semigroup(&s, t, &h, &[1.7], &q()).unwrap().value;
            assert!((c - (2.0 * a - 3.0 * b)).abs() < 1e-12);
        }
    }

    #[test]
    fn maximal_dominates_grid_values() {
        let f = step(1.0, 2.0, 1.0);
        let m = maximal_function(&cls(0.0), &f, &[2.5], &q(), None).unwrap();
        for t in [0.01, 0.1, 1.0, 10.0] {
            assert!(m.value >= apply_semigroup(&cls(0.0), t, &f, &[2.5], &q()).unwrap().value - 1e-12);
        }
        let mut fine = q();
        fine.times.per_decade = 32;
        let mf = maximal_function(&cls(0.0), &f, &[2.5], &fine, None).unwrap();
        assert!(mf.value >= m.value - 1e-15);
        let local = maximal_function(&cls(0.0), &f, &[2.5], &q(), Some(1.0)).unwrap();
        assert!(local.argmax_t <= 1.0 && local.value <= m.value);
    }

    #[test]
    fn l1_of_indicator() {
        let f = step(1.0, 2.0, 1.0);
        let mesh = outer_mesh(&f.edges[0], &q().grading);
        let vals: Vec<f64> = mesh.nodes.iter().map(|&x| if (1.0..=2.0).contains(&x) { 1.0 } else { 0.0 }).collect();
        let r = l1_norm(&vals, &[&mesh], &[0.0]).unwrap();
        assert!((r.value - 1.5).abs() < 1e-12);
        assert!(l1_norm(&vec![0.0; mesh.len()], &[&mesh], &[0.0]).unwrap().value == 0.0);
    }

    #[test]
    fn contraction_on_classical_axis() {
        let f = GridFunction::new(vec![vec![1.0, 1.5, 2.0]], vec![1.0, -0.5]).unwrap();
        let norm = f.to_cells().l1(&[0.5]);
        for t in [0.01, 0.5, 3.0] {
            let r = semigroup_l1(&cls(0.5), &f, t, &q()).unwrap();
            assert!(r.value <= norm + r.error() + 1e-9, "t={t}: {} > {norm}", r.value);
        }
    }

    #[test]
    fn local_maximal_norm_of_local_atom() {
        let nu = 0.5;
        let m = interval_weight(nu, 1.0, 2.0);
        let f = step(1.0, 2.0, 1.0 / m);
        let (r, prof) = maximal_l1(&cls(nu), &f, &q(), Some(1.0)).unwrap();
        assert!(r.value > 1.0 && r.value < 3.0, "{r:?}");
        assert!(r.error < 1e-4 * r.value);
        assert_eq!(prof.values.len(), r.nodes);
        let g = step(2.0, 4.0, 1.0 / interval_weight(nu, 2.0, 4.0));
        let (s, _) = maximal_l1(&cls(nu), &g, &q(), Some(4.0)).unwrap();
        assert!((s.value / r.value - 1.0).abs() < 1e-3);
    }

    #[test]
    fn global_norm_needs_cancellation_for_classical() {
        let f = step(1.0, 2.0, 1.0);
        assert!(matches!(maximal_l1(&cls(0.0), &f, &q(), None), Err(Error::Quadrature { .. })));
    }

    #[test]
    fn routes_agree_for_mixed_function() {
        let nu = NuVector::from_parts(&[0.5, 1.0], &[Flavor::Classical, Flavor::Exotic]).unwrap();
        let mut qs = q();
        qs.times.per_decade = 4;
        let f = GridFunction::new(vec![vec![1.0, 1.5, 2.0], vec![1.0, 2.0]], vec![1.0, -1.0]).unwrap();
        let h = h1_norm_estimate(&f, &nu, &qs).unwrap();
        let c = h.conjugated.clone().unwrap();
        assert!(h.direct.value.is_finite() && h.direct.value > 0.0);
        assert!(h.routes_agree.unwrap(), "{} vs {} (err {} {})", h.direct.value, c.value, h.direct.error, c.error);
        let f3 = GridFunction::new(f.edges.clone(), vec![3.0, -3.0]).unwrap();
        let h3 = h1_norm_estimate(&f3, &nu, &qs).unwrap();
        assert!((h3.direct.value / h.direct.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn validation_and_point_checks() {
        let mut bad = q();
        bad.eps_tail = 0.1;
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let f = step(1.0, 2.0, 1.0);
        assert!(apply_semigroup(&cls(0.0), 1.0, &f, &[0.0], &q()).is_err());
        assert!(apply_semigroup(&cls(0.0), -1.0, &f, &[1.0], &q()).is_err());
        let origin = GridFunction::dyadic(&Cuboid::new(vec![0.0], vec![1.0]).unwrap(), 1, |_| 1.0);
        assert!(matches!(maximal_l1(&cls(0.0), &origin, &q(), Some(1.0)), Err(Error::Support(_))));
        assert_eq!(log_grid(1.0, 100.0, 2).len(), 5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn apply_is_bounded_by_sup(t in 1e-3f64..1e2, x in 0.2f64..5.0, v in -3.0f64..3.0) {
            let f = GridFunction::new(vec![vec![0.5, 1.0, 3.0]], vec![v, -v / 2.0]).unwrap();
            let r = apply_semigroup(&cls(0.0), t, &f, &[x], &q()).unwrap();
            prop_assert!(r.value.abs() <= v.abs() * (1.0 + 1e-8));
        }
    }
}
