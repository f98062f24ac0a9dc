//! Numerical checks of the kernel conditions over a finite window of cubes.
//!
//! Each checker samples cubes `Q`, points `y ∈ Q*` and a logarithmic time
//! grid, integrates `sup_t` of the relevant kernel expression over the region
//! attached to `Q`, normalizes by the expected power of `d_Q` and reports how
//! far the normalized statistics spread across cubes.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::covering::{cylinder_covering, dyadic_covering_1d, dyadic_power, Covering, Cuboid, Element, Window};
use crate::error::{check_dims, Error, Result};
use crate::kernel::{AxisKernel, KernelSpec};
use crate::measure::{interval_weight, Flavor};
use crate::quad::{integrate_tensor, AxisMesh, Grading, MeshIntegral};

pub const ENVELOPE_C: [f64; 7] = [2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0];

/// Sampling and quadrature knobs shared by every checker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifySettings {
    /// Largest admissible max/min ratio of the normalized statistics.
    pub spread_bound: f64,
    /// Random `y` samples per cube on top of the deterministic ones.
    pub random_y: usize,
    pub seed: u64,
    pub t_lo_rel: f64,
    pub t_hi_rel: f64,
    pub per_decade: u32,
    pub grading: Grading,
    /// Gaussian constant `c` used by the envelope-based checks.
    pub envelope_c: f64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            spread_bound: 10.0,
            random_y: 7,
            seed: 0,
            t_lo_rel: 1e-8,
            t_hi_rel: 1e8,
            per_decade: 8,
            grading: Grading { min_rel_width: 1e-2, tail_panels: 12, zero_panels: 12, max_rel_width: 0.5 },
            envelope_c: 4.0,
        }
    }
}

impl VerifySettings {
    pub fn validate(&self) -> Result<()> {
        let g = &self.grading;
        let ok = self.spread_bound >= 1.0
            && self.t_lo_rel > 0.0
            && self.t_hi_rel > self.t_lo_rel
            && self.per_decade >= 1
            && self.envelope_c > 0.0
            && g.min_rel_width > 0.0
            && g.min_rel_width < 1.0
            && g.max_rel_width > 0.0
            && g.tail_panels >= 2
            && g.zero_panels >= 2;
        if ok {
            Ok(())
        } else {
            Err(Error::Config("verification settings out of range".into()))
        }
    }
}

/// Normalized statistic of one cube (the supremum over the sampled `y`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubeStatistic {
    pub group: String,
    pub index: Vec<i64>,
    pub levels: Vec<i64>,
    pub diameter: f64,
    pub statistic: f64,
    pub error: f64,
    /// False when a tail of the integral could not be certified.
    pub certified: bool,
    pub witness_y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub group: String,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub index: Vec<i64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
    pub value: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: String,
    pub covering: String,
    pub kernel: String,
    pub deltas: Vec<f64>,
    pub spread_bound: f64,
    pub entries: Vec<CubeStatistic>,
    pub groups: Vec<GroupSummary>,
    /// Largest normalized statistic.
    pub constant: f64,
    pub spread: f64,
    /// Fitted Gaussian constants `(C, c)` for envelope checks.
    pub envelope: Option<(f64, f64)>,
    pub max_error: f64,
    pub certified: bool,
    pub pass: bool,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
}

impl ConditionReport {
    fn assemble(
        condition: &str,
        cov: &Covering,
        kernel: String,
        deltas: Vec<f64>,
        s: &VerifySettings,
        entries: Vec<CubeStatistic>,
        witnesses: Vec<Witness>,
        notes: Vec<String>,
    ) -> Self {
        let mut names: Vec<String> = Vec::new();
        for e in &entries {
            if !names.contains(&e.group) {
                names.push(e.group.clone());
            }
        }
        let groups: Vec<GroupSummary> = names
            .into_iter()
            .map(|g| {
                let vals: Vec<f64> = entries.iter().filter(|e| e.group == g && e.certified).map(|e| e.statistic).collect();
                let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = vals.iter().cloned().fold(0.0, f64::max);
                let spread = spread_of(min, max);
                let all_certified = entries.iter().filter(|e| e.group == g).all(|e| e.certified);
                GroupSummary { group: g, min, max, spread, pass: all_certified && !vals.is_empty() && spread <= s.spread_bound }
            })
            .collect();
        let constant = entries.iter().filter(|e| e.certified).map(|e| e.statistic).fold(0.0, f64::max);
        let spread = groups.iter().map(|g| g.spread).fold(1.0, f64::max);
        let certified = entries.iter().all(|e| e.certified);
        let max_error = entries.iter().map(|e| e.error).fold(0.0, f64::max);
        let pass = certified && witnesses.is_empty() && !groups.is_empty() && groups.iter().all(|g| g.pass);
        ConditionReport {
            condition: condition.into(),
            covering: cov.name(),
            kernel,
            deltas,
            spread_bound: s.spread_bound,
            entries,
            groups,
            constant,
            spread,
            envelope: None,
            max_error,
            certified,
            pass,
            witnesses,
            notes,
        }
    }
}

fn spread_of(min: f64, max: f64) -> f64 {
    if max == 0.0 {
        1.0
    } else if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// One cube per level along the diagonal `2^n (1.5, …, 1.5)`, plus an off-diagonal
/// family `2^n (5.3, 1.5, …)` in dimension two and above.
pub fn window_cubes(cov: &Covering, window: &Window) -> Result<Vec<Element>> {
    let d = cov.dim();
    let mut out: Vec<Element> = Vec::new();
    let mut seen = BTreeSet::new();
    for n in window.level_min..=window.level_max {
        let s = 2f64.powi(n as i32);
        let mut pts = vec![vec![1.5 * s; d]];
        if d >= 2 {
            let mut p = vec![1.5 * s; d];
            p[0] = 5.3 * s;
            pts.push(p);
        }
        for p in pts {
            let e = cov.locate(&p)?;
            if seen.insert(e.index.clone()) {
                out.push(e);
            }
        }
    }
    Ok(out)
}

/// Nine deterministic points of a box (a uniform row in 1-D, the 3×3 grid in 2-D,
/// corners and centre above) followed by `random` uniform points.
pub fn box_samples(b: &Cuboid, random: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let d = b.dim();
    let (lo, hi) = (b.lower(), b.upper());
    let mut pts: Vec<Vec<f64>> = match d {
        1 => (0..9).map(|i| vec![lo[0] + (hi[0] - lo[0]) * i as f64 / 8.0]).collect(),
        2 => (0..9)
            .map(|i| vec![lo[0] + (hi[0] - lo[0]) * (i / 3) as f64 / 2.0, lo[1] + (hi[1] - lo[1]) * (i % 3) as f64 / 2.0])
            .collect(),
        _ => {
            let mut p: Vec<Vec<f64>> =
                (0..1usize << d).map(|m| (0..d).map(|k| if m >> k & 1 == 1 { hi[k] } else { lo[k] }).collect()).collect();
            p.push(b.center());
            p
        }
    };
    for _ in 0..random {
        pts.push((0..d).map(|k| rng.gen_range(lo[k]..hi[k])).collect());
    }
    pts
}

fn interior_samples(b: &Cuboid) -> Vec<Vec<f64>> {
    let d = b.dim();
    let fr: &[f64] = match d {
        1 => &[0.1, 0.3, 0.5, 0.7, 0.9],
        2 => &[0.2, 0.5, 0.8],
        _ => &[0.25, 0.75],
    };
    let n = fr.len().pow(d as u32);
    (0..n)
        .map(|mut m| {
            (0..d)
                .map(|k| {
                    let f = fr[m % fr.len()];
                    m /= fr.len();
                    b.lower()[k] + f * (b.upper()[k] - b.lower()[k])
                })
                .collect()
        })
        .collect()
}

fn cube_rng(s: &VerifySettings, ordinal: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(s.seed ^ (ordinal as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn times(lo: f64, hi: f64, per_decade: u32) -> Vec<f64> {
    crate::maximal::log_grid(lo, hi, per_decade)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Segment {
    Below(f64),
    Within(f64, f64),
    Above(f64),
}

fn segment_mesh(s: Segment, focus: f64, g: &Grading) -> AxisMesh {
    let mut m = AxisMesh::empty();
    match s {
        Segment::Below(a) => {
            m.add_to_zero(0.5 * a, g);
            m.add_graded(0.5 * a, a, &[], [false, true], g);
        }
        Segment::Within(a, b) => m.add_graded(a, b, &[focus], [false, false], g),
        Segment::Above(b) => {
            m.add_graded(b, 2.0 * b, &[], [true, false], g);
            m.add_to_infinity(2.0 * b, g);
        }
    }
    m
}

/// Products of per-axis segments covering the complement of `q`.
fn complement_regions(q: &Cuboid) -> Vec<Vec<Segment>> {
    let d = q.dim();
    let mut out = Vec::new();
    for m in 0..3usize.pow(d as u32) {
        let mut code = m;
        let mut all_in = true;
        let mut r = Vec::with_capacity(d);
        for k in 0..d {
            let c = code % 3;
            code /= 3;
            r.push(match c {
                0 => Segment::Within(q.lower()[k], q.upper()[k]),
                1 => {
                    all_in = false;
                    Segment::Below(q.lower()[k])
                }
                _ => {
                    all_in = false;
                    Segment::Above(q.upper()[k])
                }
            });
        }
        if !all_in && r.iter().all(|s| !matches!(s, Segment::Below(a) if *a <= 0.0)) {
            out.push(r);
        }
    }
    out
}

fn inside_region(q: &Cuboid) -> Vec<Vec<Segment>> {
    vec![(0..q.dim()).map(|k| Segment::Within(q.lower()[k], q.upper()[k])).collect()]
}

const T_BLOCK: usize = 8;
pub const MAX_DIM: usize = 8;
const MAX_WEIGHTS: usize = 8;

type AxisFn<'a> = &'a (dyn Fn(usize, f64, f64) -> f64 + Sync);

/// `Σ_regions ∫ max_t w_p(t) |∏_k A_k(t, x_k) − ∏_k B_k(t, x_k)| · m(x) dμ_ν(x)`, one result per weight set `p`.
///
/// `a` and `b` receive `(axis, t, x_k)`; `b` may be absent.
#[allow(clippy::too_many_arguments)]
fn sup_integrals(
    regions: &[Vec<Segment>],
    y: &[f64],
    ts: &[f64],
    weights: &[Vec<f64>],
    a: AxisFn,
    b: Option<AxisFn>,
    nodal: Option<&(dyn Fn(&[f64]) -> f64 + Sync)>,
    nu: &[f64],
    g: &Grading,
) -> Vec<MeshIntegral> {
    if weights.len() > MAX_WEIGHTS {
        return weights.chunks(MAX_WEIGHTS).flat_map(|w| sup_integrals(regions, y, ts, w, a, b, nodal, nu, g)).collect();
    }
    let d = y.len();
    assert!(d <= MAX_DIM, "at most {MAX_DIM} axes");
    let mut acc = vec![MeshIntegral { value: 0.0, quad_error: 0.0, tail_error: 0.0, tails_converge: true }; weights.len()];
    for region in regions {
        let meshes: Vec<AxisMesh> = region.iter().enumerate().map(|(k, &s)| segment_mesh(s, y[k], g)).collect();
        let nt = ts.len();
        let table = |f: AxisFn| -> Vec<Vec<f64>> {
            (0..d)
                .map(|k| {
                    let rows: Vec<Vec<f64>> = crate::par::map(&meshes[k].nodes, |&x| ts.iter().map(|&t| f(k, t, x)).collect());
                    rows.concat()
                })
                .collect()
        };
        let ta = table(a);
        let tb = b.map(table);
        let sizes: Vec<usize> = meshes.iter().map(AxisMesh::len).collect();
        let total: usize = sizes.iter().product();
        // per-block maxima of |A_k| bound the product, so whole blocks of t can be skipped exactly
        let nb = nt.div_ceil(T_BLOCK);
        let blocks = |t: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            t.iter()
                .map(|rows| {
                    rows.chunks(nt)
                        .flat_map(|row| row.chunks(T_BLOCK).map(|c| c.iter().fold(0.0f64, |m, v| m.max(v.abs()))))
                        .collect()
                })
                .collect()
        };
        let ba = blocks(&ta);
        let bb = tb.as_ref().map(blocks);
        // |∏A − ∏B| ≤ Σ_k ∏_{j<k} |B_j| |A_k − B_k| ∏_{j>k} |A_j|
        let bd = tb.as_ref().map(|tb| {
            let diff: Vec<Vec<f64>> = ta.iter().zip(tb).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect();
            blocks(&diff)
        });
        let wmax: Vec<Vec<f64>> =
            weights.iter().map(|w| w.chunks(T_BLOCK).map(|c| c.iter().fold(0.0f64, |m, v| m.max(*v))).collect()).collect();
        let np = weights.len();
        let nodal_vals: Vec<[f64; MAX_WEIGHTS]> = crate::par::map_range(total, |flat| {
            let mut idx = [0usize; MAX_DIM];
            let mut rest = flat;
            for k in (0..d).rev() {
                idx[k] = rest % sizes[k];
                rest /= sizes[k];
            }
            let mult = match nodal {
                Some(m) => {
                    let x: Vec<f64> = (0..d).map(|k| meshes[k].nodes[idx[k]]).collect();
                    m(&x)
                }
                None => 1.0,
            };
            let mut best = [0.0f64; MAX_WEIGHTS];
            if mult == 0.0 {
                return best;
            }
            let bound = |blk: usize| {
                let mut u = 1.0;
                for k in 0..d {
                    u *= ba[k][idx[k] * nb + blk];
                }
                if let (Some(bb), Some(bd)) = (&bb, &bd) {
                    let mut v = 1.0;
                    for k in 0..d {
                        v *= bb[k][idx[k] * nb + blk];
                    }
                    let mut tele = 0.0;
                    for k in 0..d {
                        let mut term = bd[k][idx[k] * nb + blk];
                        for j in 0..d {
                            if j < k {
                                term *= bb[j][idx[j] * nb + blk];
                            } else if j > k {
                                term *= ba[j][idx[j] * nb + blk];
                            }
                        }
                        tele += term;
                    }
                    u = (u + v).min(tele);
                }
                u
            };
            let mut first = (0, f64::NEG_INFINITY);
            for blk in 0..nb {
                let key = bound(blk) * wmax.iter().map(|w| w[blk]).fold(0.0, f64::max);
                if key > first.1 {
                    first = (blk, key);
                }
            }
            for blk in std::iter::once(first.0).chain((0..nb).filter(|&blk| blk != first.0)) {
                let u = bound(blk) * (1.0 + 1e-12);
                if !(0..np).any(|p| wmax[p][blk] * u > best[p]) {
                    continue;
                }
                for ti in blk * T_BLOCK..((blk + 1) * T_BLOCK).min(nt) {
                    let mut pa = 1.0;
                    for k in 0..d {
                        pa *= ta[k][idx[k] * nt + ti];
                    }
                    let v = match &tb {
                        Some(tb) => {
                            let mut pb = 1.0;
                            for k in 0..d {
                                pb *= tb[k][idx[k] * nt + ti];
                            }
                            (pa - pb).abs()
                        }
                        None => pa.abs(),
                    };
                    for p in 0..np {
                        best[p] = best[p].max(weights[p][ti] * v);
                    }
                }
            }
            best.iter_mut().for_each(|v| *v *= mult);
            best
        });
        let weighted: Vec<AxisMesh> = meshes.iter().zip(nu).map(|(m, &n)| m.clone().weighted(|x| x.powf(2.0 * n + 1.0))).collect();
        let refs: Vec<&AxisMesh> = weighted.iter().collect();
        for (p, slot) in acc.iter_mut().enumerate() {
            let vals: Vec<f64> = nodal_vals.iter().map(|v| v[p]).collect();
            let r = integrate_tensor(&refs, &vals);
            slot.value += r.value;
            slot.quad_error += r.quad_error;
            slot.tail_error += r.tail_error;
            slot.tails_converge &= r.tails_converge;
        }
    }
    acc
}

fn region_reach(regions: &[Vec<Segment>], g: &Grading) -> f64 {
    let mut reach: f64 = 0.0;
    for r in regions {
        for s in r {
            reach = reach.max(match *s {
                Segment::Below(a) => a,
                Segment::Within(_, b) => b,
                Segment::Above(b) => 2.0 * b * 2f64.powi(g.tail_panels as i32),
            });
        }
    }
    reach
}

fn kernel_fn(spec: &KernelSpec, y: &[f64]) -> impl Fn(usize, f64, f64) -> f64 + Sync {
    let axes = spec.axes.clone();
    let y = y.to_vec();
    move |k: usize, t: f64, x: f64| axes[k].eval(t, x, y[k])
}

fn comparator(spec: &KernelSpec) -> Result<KernelSpec> {
    spec.axes
        .iter()
        .map(|a| AxisKernel::classical(a.measure_nu()))
        .collect::<Result<Vec<_>>>()
        .map(KernelSpec::new)
        .map_err(|e| Error::Precondition(format!("no classical comparator: {e}")))
}

fn diameter(q: &Cuboid) -> f64 {
    q.diameter()
}

struct Sampled {
    value: f64,
    error: f64,
    certified: bool,
}

fn sampled(r: &MeshIntegral, norm: f64) -> Sampled {
    Sampled { value: r.value / norm, error: r.error() / norm, certified: r.tails_converge }
}

/// Supremum over `y` of several statistics, one per group.
fn fold_y(per_y: Vec<(Vec<f64>, Vec<Sampled>)>, groups: &[String], q: &Element, cov: &Covering) -> Vec<CubeStatistic> {
    let mut out: Vec<CubeStatistic> = groups
        .iter()
        .map(|g| CubeStatistic {
            group: g.clone(),
            index: q.index.clone(),
            levels: cov.levels(&q.index),
            diameter: diameter(&q.cube),
            statistic: 0.0,
            error: 0.0,
            certified: true,
            witness_y: vec![],
        })
        .collect();
    for (y, stats) in per_y {
        for (slot, s) in out.iter_mut().zip(stats) {
            slot.certified &= s.certified;
            if s.value > slot.statistic || slot.witness_y.is_empty() {
                slot.statistic = s.value;
                slot.error = s.error;
                slot.witness_y = y.clone();
            }
        }
    }
    out
}

fn check_cubes(cov: &Covering, cubes: &[Element]) -> Result<()> {
    if cubes.is_empty() {
        return Err(Error::Config("no cubes to test".into()));
    }
    for q in cubes {
        check_dims(cov.dim(), q.cube.dim())?;
    }
    Ok(())
}

/// Fit `(C, c)` with `0 ≤ T_t(x, y) ≤ C μ(B(x, √t))^{-1} exp(−|x−y|²/(ct))` for
/// `x ∈ N(Q)`, `y ∈ Q*`. The smallest `c` of [`ENVELOPE_C`] whose per-cube
/// constants are uniform is reported.
pub fn check_a0(spec: &KernelSpec, cov: &Covering, cubes: &[Element], s: &VerifySettings) -> Result<ConditionReport> {
    s.validate()?;
    check_dims(cov.dim(), spec.dim())?;
    check_cubes(cov, cubes)?;
    let nu = spec.measure_nu();
    let kappa = cov.kappa();
    type CubeA0 = (Vec<f64>, Vec<Witness>);
    let per_cube: Vec<Result<CubeA0>> = crate::par::map_range(cubes.len(), |ord| {
        let q = &cubes[ord];
        let d2 = diameter(&q.cube).powi(2);
        let ts = times(s.t_lo_rel * d2, s.t_hi_rel * d2, 4);
        let mut rng = cube_rng(s, ord);
        let ys = box_samples(&q.cube.star(kappa, 1), s.random_y, &mut rng);
        let xs: Vec<Vec<f64>> = cov.neighbors(&q.cube)?.iter().flat_map(|e| interior_samples(&e.cube)).collect();
        let mut best = vec![0.0f64; ENVELOPE_C.len()];
        let mut wit = Vec::new();
        for x in &xs {
            for y in &ys {
                let d2xy: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                for &t in &ts {
                    let v = spec.eval(t, x, y);
                    if v < 0.0 || !v.is_finite() {
                        wit.push(Witness { index: q.index.clone(), x: x.clone(), y: y.clone(), t, value: v, note: "negative or non-finite kernel".into() });
                        continue;
                    }
                    if v == 0.0 {
                        continue;
                    }
                    let r = t.sqrt();
                    let ln_m: f64 = (0..x.len()).map(|k| interval_weight(nu[k], (x[k] - r).max(0.0), x[k] + r).ln()).sum();
                    for (i, &c) in ENVELOPE_C.iter().enumerate() {
                        let ratio = (v.ln() + ln_m + d2xy / (c * t)).exp();
                        best[i] = best[i].max(ratio);
                    }
                }
            }
        }
        Ok((best, wit))
    });
    let mut per_c: Vec<Vec<f64>> = Vec::with_capacity(cubes.len());
    let mut witnesses = Vec::new();
    for r in per_cube {
        let (b, w) = r?;
        per_c.push(b);
        witnesses.extend(w);
    }
    let mut chosen = ENVELOPE_C.len() - 1;
    for i in 0..ENVELOPE_C.len() {
        let col: Vec<f64> = per_c.iter().map(|b| b[i]).collect();
        let max = col.iter().cloned().fold(0.0, f64::max);
        let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
        if max.is_finite() && spread_of(min, max) <= s.spread_bound {
            chosen = i;
            break;
        }
    }
    let entries: Vec<CubeStatistic> = cubes
        .iter()
        .zip(&per_c)
        .map(|(q, b)| CubeStatistic {
            group: "envelope".into(),
            index: q.index.clone(),
            levels: cov.levels(&q.index),
            diameter: diameter(&q.cube),
            statistic: b[chosen],
            error: 0.0,
            certified: b[chosen].is_finite(),
            witness_y: vec![],
        })
        .collect();
    let mut rep = ConditionReport::assemble("A0", cov, spec.label(), vec![], s, entries, witnesses, vec![]);
    rep.envelope = Some((rep.constant, ENVELOPE_C[chosen]));
    Ok(rep)
}

fn delta_group(delta: f64) -> String {
    format!("delta={delta}")
}

/// `sup_{y∈Q*} ∫_{(Q**)^c} sup_{t>0} t^δ T_t(x, y) dμ(x) / d_Q^{2δ}` for each `δ`.
pub fn check_a1(spec: &KernelSpec, cov: &Covering, gamma: f64, deltas: &[f64], cubes: &[Element], s: &VerifySettings) -> Result<ConditionReport> {
    s.validate()?;
    if let Some(d) = deltas.iter().find(|d| !(d.abs() < gamma)) {
        return Err(Error::Precondition(format!("delta {d} outside (-gamma, gamma)")));
    }
    let rep = a1_like("A1", spec, cov, deltas, cubes, s)?;
    Ok(rep)
}

/// `(A1')`: the `δ = 0` case of [`check_a1`] without the `γ` bound.
pub fn check_a1_prime(spec: &KernelSpec, cov: &Covering, cubes: &[Element], s: &VerifySettings) -> Result<ConditionReport> {
    s.validate()?;
    a1_like("A1p", spec, cov, &[0.0], cubes, s)
}

fn a1_like(name: &str, spec: &KernelSpec, cov: &Covering, deltas: &[f64], cubes: &[Element], s: &VerifySettings) -> Result<ConditionReport> {
    check_dims(cov.dim(), spec.dim())?;
    check_cubes(cov, cubes)?;
    let nu = spec.measure_nu();
    let kappa = cov.kappa();
    let groups: Vec<String> = deltas.iter().map(|&d| delta_group(d)).collect();
    let mut entries = Vec::new();
    for (ord, q) in cubes.iter().enumerate() {
        let dq = diameter(&q.cube);
        let regions = complement_regions(&q.cube.star(kappa, 2));
        let reach = region_reach(&regions, &s.grading);
        let ts = times(s.t_lo_rel * dq * dq, (s.t_hi_rel * dq * dq).max(4.0 * reach * reach), s.per_decade);
        let weights: Vec<Vec<f64>> = deltas.iter().map(|&d| ts.iter().map(|t| t.powf(d)).collect()).collect();
        let mut rng = cube_rng(s, ord);
        let ys = box_samples(&q.cube.star(kappa, 1), s.random_y, &mut rng);
        let per_y: Vec<(Vec<f64>, Vec<Sampled>)> = crate::par::map(&ys, |y| {
            let a = kernel_fn(spec, y);
            let r = sup_integrals(&regions, y, &ts, &weights, &a, None, None, &nu, &s.grading);
            let st = r.iter().zip(deltas).map(|(m, &d)| sampled(m, dq.powf(2.0 * d))).collect();
            (y.clone(), st)
        });
        entries.extend(fold_y(per_y, &groups, q, cov));
    }
    let mut notes = Vec::new();
    if entries.iter().any(|e| !e.certified) {
        notes.push("outer tail did not decay; the integral is not certified finite".into());
    }
    Ok(ConditionReport::assemble(name, cov, spec.label(), deltas.to_vec(), s, entries, vec![], notes))
}

/// `sup_{y∈Q*} ∫_{Q**} sup_{t≤d_Q²} t^{-δ} |T_t − W^cls_t|(x, y) dμ(x) / d_Q^{-2δ}` for each `δ`.
pub fn check_a2(spec: &KernelSpec, cov: &Covering, gamma: f64, deltas: &[f64], cubes: &[Element], s: &VerifySettings) -> Result<ConditionReport> {
    s.validate()?;
    if let Some(d) = deltas.iter().find(|&&d| !(0.0..gamma).contains(&d)) {
        return Err(Error::Precondition(format!("delta {d} outside [0, gamma)")));
    }
    a2_like("A2", spec, cov, deltas, cubes, s)
}

/// `(A2')`: the `δ = 0` case of [`check_a2`].
pub fn check_a2_prime(spec: &KernelSpec, cov: &Covering, cubes: &[Element], s: &VerifySettings) -> Result<ConditionReport> {
    s.validate()?;
    a2_like("A2p", spec, cov, &[0.0], cubes, s)
}

fn a2_like(name: &str, spec: &KernelSpec, cov: &Covering, deltas: &[f64], cubes: &[Element], s: &VerifySettings) -> Result<ConditionReport> {
    check_dims(cov.dim(), spec.dim())?;
    check_cubes(cov, cubes)?;
    let cmp = comparator(spec)?;
    let nu = spec.measure_nu();
    let kappa = cov.kappa();
    let groups: Vec<String> = deltas.iter().map(|&d| delta_group(d)).collect();
    let mut entries = Vec::new();
    for (ord, q) in cubes.iter().enumerate() {
        let dq = diameter(&q.cube);
        let regions = inside_region(&q.cube.star(kappa, 2));
        let ts = times(s.t_lo_rel * dq * dq, dq * dq, s.per_decade);
        let weights: Vec<Vec<f64>> = deltas.iter().map(|&d| ts.iter().map(|t| t.powf(-d)).collect()).collect();
        let mut rng = cube_rng(s, ord);
        let ys = box_samples(&q.cube.star(kappa, 1), s.random_y, &mut rng);
        let per_y: Vec<(Vec<f64>, Vec<Sampled>)> = crate::par::map(&ys, |y| {
            let a = kernel_fn(spec, y);
            let b = kernel_fn(&cmp, y);
            let r = sup_integrals(&regions, y, &ts, &weights, &a, Some(&b), None, &nu, &s.grading);
            let st = r.iter().zip(deltas).map(|(m, &d)| sampled(m, dq.powf(-2.0 * d))).collect();
            (y.clone(), st)
        });
        entries.extend(fold_y(per_y, &groups, q, cov));
    }
    Ok(ConditionReport::assemble(name, cov, spec.label(), deltas.to_vec(), s, entries, vec![], vec![]))
}

const SHELL_MAX: usize = 48;

/// `(a3)` and `(a4)`. The sum in `(a4)` runs over shells `[y 2^{-j}, y 2^j]` of
/// covering elements; the remainder past the last shell is extrapolated from the
/// ratio of the last two shell sums and the sum is uncertified if they do not decay.
pub fn check_a3_a4(spec: &KernelSpec, cov: &Covering, cubes: &[Element], s: &VerifySettings) -> Result<ConditionReport> {
    s.validate()?;
    check_dims(cov.dim(), spec.dim())?;
    check_cubes(cov, cubes)?;
    let nu = spec.measure_nu();
    let kappa = cov.kappa();
    let groups = ["a3".to_string(), "a4".to_string()];
    let all_levels = Window { level_min: -1000, level_max: 1000 };
    let mut entries = Vec::new();
    let mut notes = Vec::new();
    for (ord, q0) in cubes.iter().enumerate() {
        let dq = diameter(&q0.cube);
        let star2 = q0.cube.star(kappa, 2);
        let regions = inside_region(&star2);
        let mut rng = cube_rng(s, ord);
        let ys = box_samples(&q0.cube.star(kappa, 1), s.random_y, &mut rng);
        let t_hi = (s.t_hi_rel * dq * dq).max(4.0 * region_reach(&regions, &s.grading).powi(2));
        let ts3 = times(dq * dq, t_hi, s.per_decade);
        let w3 = vec![vec![1.0; ts3.len()]];
        let y4 = box_samples(&q0.cube, s.random_y, &mut rng);
        let a3: Vec<(Vec<f64>, Vec<Sampled>)> = crate::par::map(&ys, |y| {
            let a = kernel_fn(spec, y);
            let r = sup_integrals(&regions, y, &ts3, &w3, &a, None, None, &nu, &s.grading);
            (y.clone(), vec![sampled(&r[0], 1.0)])
        });
        let a4: Vec<Result<(Vec<f64>, Sampled)>> = crate::par::map(&y4, |y| {
            let a = kernel_fn(spec, y);
            let term = |q: &Element| -> Result<MeshIntegral> {
                let dq = diameter(&q.cube);
                let reg = inside_region(&q.cube.star(kappa, 2));
                let ts = times(s.t_lo_rel * dq * dq, dq * dq, s.per_decade);
                let psi_y = cov.psi(q, y)?;
                let m = |x: &[f64]| (cov.psi(q, x).unwrap_or(0.0) - psi_y).abs();
                Ok(sup_integrals(&reg, y, &ts, &[vec![1.0; ts.len()]], &a, None, Some(&m), &nu, &s.grading).remove(0))
            };
            let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
            let mut total = 0.0;
            let mut error = 0.0;
            let mut certified = true;
            for q in cov.neighbors(&q0.cube)? {
                seen.insert(q.index.clone());
                let r = term(&q)?;
                total += r.value;
                error += r.error();
                certified &= r.tails_converge;
            }
            let mut shells: Vec<f64> = Vec::new();
            for j in 1..=SHELL_MAX {
                let f = 2f64.powi(j as i32);
                let lo: Vec<f64> = y.iter().map(|v| v / f).collect();
                let hi: Vec<f64> = y.iter().map(|v| v * f).collect();
                let mut shell = 0.0;
                for q in cov.elements_in_box(&lo, &hi, &all_levels)? {
                    if seen.insert(q.index.clone()) {
                        let r = term(&q)?;
                        shell += r.value;
                        error += r.error();
                        certified &= r.tails_converge;
                    }
                }
                total += shell;
                shells.push(shell);
                if j >= 6 && shell <= 1e-13 * total {
                    break;
                }
            }
            let n = shells.len();
            let (last, prev) = (shells[n - 1], shells[n - 2]);
            if last > 1e-13 * total {
                let rho = last / prev;
                if rho.is_finite() && rho < 0.9 {
                    error += last * rho / (1.0 - rho);
                    total += last * rho / (1.0 - rho);
                } else {
                    certified = false;
                }
            }
            Ok((y.clone(), Sampled { value: total, error, certified }))
        });
        let mut a4_y = Vec::with_capacity(a4.len());
        for r in a4 {
            let (y, v) = r?;
            a4_y.push((y, vec![v]));
        }
        let mut folded = fold_y(a3, &groups[..1], q0, cov);
        folded.extend(fold_y(a4_y, &groups[1..], q0, cov));
        if folded.iter().any(|e| e.group == "a4" && !e.certified) && notes.is_empty() {
            notes.push("the sum over the covering in (a4) does not decay geometrically".into());
        }
        entries.extend(folded);
    }
    Ok(ConditionReport::assemble("a3a4", cov, spec.label(), vec![], s, entries, vec![], notes))
}

/// Envelope integrals over `Q**` (weight `t^δ`, normalized by `d_Q^{2δ}`) and over
/// its complement (weight `t^{-δ}`, normalized by `d_Q^{-2δ}`).
pub fn check_envelope_integrable(nu: &[f64], cov: &Covering, delta: f64, cubes: &[Element], s: &VerifySettings) -> Result<ConditionReport> {
    s.validate()?;
    check_dims(cov.dim(), nu.len())?;
    check_cubes(cov, cubes)?;
    if nu.iter().any(|&n| !(n > -1.0)) {
        return Err(Error::domain("orders must exceed -1"));
    }
    let bound = nu.iter().map(|n| n + 1.0).fold(0.5, f64::min);
    if !(delta > 0.0 && delta < bound) {
        return Err(Error::Precondition(format!("delta must lie in (0, {bound})")));
    }
    let kappa = cov.kappa();
    let c = s.envelope_c;
    let groups = vec!["in".to_string(), "out".to_string()];
    let mut entries = Vec::new();
    for (ord, q) in cubes.iter().enumerate() {
        let dq = diameter(&q.cube);
        let star2 = q.cube.star(kappa, 2);
        let inner = inside_region(&star2);
        let outer = complement_regions(&star2);
        let reach = region_reach(&outer, &s.grading);
        let ts = times(s.t_lo_rel * dq * dq, (s.t_hi_rel * dq * dq).max(4.0 * reach * reach), s.per_decade);
        let w_in = vec![ts.iter().map(|t| t.powf(delta)).collect::<Vec<f64>>()];
        let w_out = vec![ts.iter().map(|t| t.powf(-delta)).collect::<Vec<f64>>()];
        let mut rng = cube_rng(s, ord);
        let ys = box_samples(&q.cube.star(kappa, 1), s.random_y, &mut rng);
        let per_y: Vec<(Vec<f64>, Vec<Sampled>)> = crate::par::map(&ys, |y| {
            let yv = y.clone();
            let env = move |k: usize, t: f64, x: f64| {
                let r = t.sqrt();
                let dx = x - yv[k];
                (-dx * dx / (c * t)).exp() / interval_weight(nu[k], (x - r).max(0.0), x + r)
            };
            let i = sup_integrals(&inner, y, &ts, &w_in, &env, None, None, nu, &s.grading);
            let o = sup_integrals(&outer, y, &ts, &w_out, &env, None, None, nu, &s.grading);
            (y.clone(), vec![sampled(&i[0], dq.powf(2.0 * delta)), sampled(&o[0], dq.powf(-2.0 * delta))])
        });
        entries.extend(fold_y(per_y, &groups, q, cov));
    }
    Ok(ConditionReport::assemble("lemma24", cov, format!("envelope(c={c})"), vec![delta], s, entries, vec![], vec![]))
}

/// `P = sup_{t≤d_Q²} μ(B(x,√t))^{-1} e^{-|x−y|²/(ct)} |x−y|^ε x^{2ν+1}` against
/// `min(x, |x−y|)^{ε−1}` on a one-dimensional covering.
pub fn check_sup_t_bound(nu: f64, eps: f64, cov: &Covering, cubes: &[Element], s: &VerifySettings) -> Result<ConditionReport> {
    s.validate()?;
    check_dims(1, cov.dim())?;
    check_cubes(cov, cubes)?;
    if !(nu > -1.0) || !(eps > 0.0 && eps < 2.0 * nu + 2.0) {
        return Err(Error::Precondition(format!("need nu > -1 and eps in (0, {})", 2.0 * nu + 2.0)));
    }
    let kappa = cov.kappa();
    let c = s.envelope_c;
    let mut entries = Vec::new();
    let mut skipped = 0usize;
    for (ord, q) in cubes.iter().enumerate() {
        let dq = diameter(&q.cube);
        let ts = times(s.t_lo_rel * dq * dq, dq * dq, s.per_decade);
        let mut rng = cube_rng(s, ord);
        let ys = box_samples(&q.cube.star(kappa, 1), s.random_y, &mut rng);
        let xs: Vec<f64> = cov.neighbors(&q.cube)?.iter().flat_map(|e| interior_samples(&e.cube)).map(|p| p[0]).collect();
        let mut best = 0.0f64;
        let mut arg = vec![];
        for y in &ys {
            for &x in &xs {
                let dxy = (x - y[0]).abs();
                if dxy == 0.0 {
                    skipped += 1;
                    continue;
                }
                let p = ts
                    .iter()
                    .map(|&t| {
                        let r = t.sqrt();
                        (-dxy * dxy / (c * t)).exp() / interval_weight(nu, (x - r).max(0.0), x + r)
                    })
                    .fold(0.0, f64::max)
                    * dxy.powf(eps)
                    * x.powf(2.0 * nu + 1.0);
                let ratio = p / x.min(dxy).powf(eps - 1.0);
                if ratio > best {
                    best = ratio;
                    arg = vec![x, y[0]];
                }
            }
        }
        entries.push(CubeStatistic {
            group: format!("eps={eps}"),
            index: q.index.clone(),
            levels: cov.levels(&q.index),
            diameter: dq,
            statistic: best,
            error: 0.0,
            certified: true,
            witness_y: arg,
        });
    }
    let mut notes = Vec::new();
    if skipped > 0 {
        notes.push(format!("{skipped} samples with x = y skipped"));
    }
    Ok(ConditionReport::assemble("supT", cov, format!("envelope(nu={nu}, c={c})"), vec![], s, entries, vec![], notes))
}

/// `(A0)`–`(A2)` for `W^cls ⊗ T` against the cylinder covering `ℝ₊^{d1} ⊠ 𝒬₂`.
#[allow(clippy::too_many_arguments)]
pub fn check_prop_locnonloc(
    spec2: &KernelSpec,
    cov2: &Covering,
    nu_cls: &[f64],
    gamma: f64,
    a1_deltas: &[f64],
    a2_deltas: &[f64],
    window: &Window,
    s: &VerifySettings,
) -> Result<Vec<ConditionReport>> {
    let mut axes = nu_cls.iter().map(|&n| AxisKernel::classical(n)).collect::<Result<Vec<_>>>()?;
    axes.extend(spec2.axes.iter().cloned());
    let spec = KernelSpec::new(axes);
    let cov = cylinder_covering(nu_cls.len(), cov2.clone());
    let cubes = window_cubes(&cov, window)?;
    let mut out = vec![
        check_a0(&spec, &cov, &cubes, s)?,
        check_a1(&spec, &cov, gamma, a1_deltas, &cubes, s)?,
        check_a2(&spec, &cov, gamma, a2_deltas, &cubes, s)?,
    ];
    for r in &mut out {
        r.condition = format!("prop42/{}", r.condition);
    }
    Ok(out)
}

/// Every report of a battery run together with the resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatteryReport {
    pub schema: u32,
    /// Seconds since the Unix epoch; excluded from reproducibility comparisons.
    pub generated_unix: u64,
    pub config: Config,
    pub reports: Vec<ConditionReport>,
    pub certified: bool,
    pub pass: bool,
}

fn deltas_for(cfg: &Config, gamma: f64) -> (Vec<f64>, Vec<f64>) {
    if cfg.deltas.is_empty() {
        (vec![-gamma / 2.0, 0.0, gamma / 2.0], vec![0.0, gamma / 2.0])
    } else {
        (cfg.deltas.clone(), cfg.deltas.iter().cloned().filter(|&d| d >= 0.0).collect())
    }
}

/// One condition of the battery by name: `A0`, `A1`, `A2`, `A1p`, `A2p`,
/// `a3a4`, `lemma24`, `supT` or `prop42`.
pub fn run_condition(cfg: &Config, name: &str) -> Result<Vec<ConditionReport>> {
    cfg.validate()?;
    let s = VerifySettings { seed: cfg.seed, ..cfg.verify.clone() };
    let nu = cfg.nu_vector()?;
    let window = cfg.window()?;
    let dyadic = dyadic_covering_1d().with_kappa(cfg.kappa)?;
    let d_cubes = window_cubes(&dyadic, &window)?;
    let exotic = cfg.gammas();
    let classical: Vec<f64> = nu.axes.iter().filter(|a| a.flavor == Flavor::Classical).map(|a| a.nu).collect();
    let k_specs = || exotic.iter().map(|&(n, g)| Ok((KernelSpec::new(vec![AxisKernel::conjugated(n)?]), g)));
    let w_specs = || classical.iter().map(|&n| AxisKernel::classical(n).map(|k| KernelSpec::new(vec![k])));
    let mut out = Vec::new();
    match name {
        "A0" => {
            for r in k_specs() {
                let (k, _) = r?;
                out.push(check_a0(&k, &dyadic, &d_cubes, &s)?);
            }
            for w in w_specs() {
                out.push(check_a0(&w?, &dyadic, &d_cubes, &s)?);
            }
        }
        "A1" | "A2" => {
            for r in k_specs() {
                let (k, g) = r?;
                let (d1, d2) = deltas_for(cfg, g);
                out.push(if name == "A1" {
                    check_a1(&k, &dyadic, g, &d1, &d_cubes, &s)?
                } else {
                    check_a2(&k, &dyadic, g, &d2, &d_cubes, &s)?
                });
            }
        }
        "A1p" | "A2p" => {
            let specs: Vec<KernelSpec> = k_specs().map(|r| r.map(|p| p.0)).chain(w_specs()).collect::<Result<_>>()?;
            for k in specs {
                out.push(if name == "A1p" {
                    check_a1_prime(&k, &dyadic, &d_cubes, &s)?
                } else {
                    check_a2_prime(&k, &dyadic, &d_cubes, &s)?
                });
            }
        }
        "a3a4" => {
            for r in k_specs() {
                out.push(check_a3_a4(&r?.0, &dyadic, &d_cubes, &s)?);
            }
        }
        "lemma24" => {
            let eff: Vec<f64> = nu.axes.iter().map(|a| a.nu).collect();
            let bound = eff.iter().map(|n| n + 1.0).fold(0.5, f64::min);
            let delta = cfg.envelope_delta.min(0.5 * bound);
            let cov = cfg.covering()?;
            let cubes = window_cubes(&cov, &window)?;
            out.push(check_envelope_integrable(&eff, &cov, delta, &cubes, &s)?);
        }
        "supT" => {
            for a in &nu.axes {
                let eps = (a.nu + 1.0).min(0.5);
                out.push(check_sup_t_bound(a.nu, eps, &dyadic, &d_cubes, &s)?);
            }
        }
        "prop42" => {
            if !exotic.is_empty() {
                let axes = exotic.iter().map(|&(n, _)| AxisKernel::conjugated(n)).collect::<Result<Vec<_>>>()?;
                let gamma = exotic.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
                let (d1, d2) = deltas_for(cfg, gamma);
                let cov2 = dyadic_power(exotic.len()).with_kappa(cfg.kappa)?;
                out.extend(check_prop_locnonloc(&KernelSpec::new(axes), &cov2, &classical, gamma, &d1, &d2, &window, &s)?);
            }
        }
        other => return Err(Error::Config(format!("unknown condition {other}"))),
    }
    Ok(out)
}

pub const BATTERY: [&str; 8] = ["A0", "A1", "A2", "a3a4", "lemma24", "supT", "prop42", "A2p"];

/// The full battery for the configured mixed setup.
pub fn run_battery(cfg: &Config, generated_unix: u64) -> Result<BatteryReport> {
    let mut reports = Vec::new();
    for name in BATTERY {
        reports.extend(run_condition(cfg, name)?);
    }
    Ok(BatteryReport::new(cfg.clone(), reports, generated_unix))
}

impl BatteryReport {
    pub fn new(config: Config, reports: Vec<ConditionReport>, generated_unix: u64) -> Self {
        let certified = reports.iter().all(|r| r.certified);
        let pass = reports.iter().all(|r| r.pass);
        BatteryReport { schema: 1, generated_unix, config, reports, certified, pass }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{dyadic_covering_1d, qb_covering};

    fn quick() -> VerifySettings {
        VerifySettings { random_y: 2, per_decade: 4, ..VerifySettings::default() }
    }

    fn cubes(cov: &Covering, lo: i64, hi: i64) -> Vec<Element> {
        window_cubes(cov, &Window::new(lo, hi).unwrap()).unwrap()
    }

    fn k(nu: f64) -> KernelSpec {
        KernelSpec::new(vec![AxisKernel::conjugated(nu).unwrap()])
    }

    fn w(nu: f64) -> KernelSpec {
        KernelSpec::new(vec![AxisKernel::classical(nu).unwrap()])
    }

    #[test]
    fn samples_and_regions() {
        let q = Cuboid::new(vec![1.0, 1.0], vec![2.0, 3.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = box_samples(&q, 7, &mut rng);
        assert_eq!(pts.len(), 16);
        assert!(pts.iter().all(|p| q.contains(p)));
        assert_eq!(complement_regions(&q).len(), 8);
        let q1 = Cuboid::new(vec![1.0], vec![2.0]).unwrap();
        assert_eq!(complement_regions(&q1).len(), 2);
        assert_eq!(cubes(&dyadic_covering_1d(), -3, 3).len(), 7);
    }

    #[test]
    fn a0_classical_and_conjugated() {
        let cov = dyadic_covering_1d();
        let c = cubes(&cov, -2, 2);
        let r = check_a0(&w(0.0), &cov, &c, &quick()).unwrap();
        assert!(r.pass, "{:?}", r.groups);
        let r = check_a0(&k(1.0), &cov, &c, &quick()).unwrap();
        assert!(r.pass && r.envelope.unwrap().0.is_finite());
    }

    #[test]
    fn a1_conjugated_is_scale_invariant() {
        let cov = dyadic_covering_1d();
        let r = check_a1(&k(1.0), &cov, 0.3, &[0.0, 0.1], &cubes(&cov, -1, 1), &quick()).unwrap();
        assert!(r.pass && r.certified, "{:?}", r.groups);
        assert!(r.groups.iter().all(|g| g.spread < 1.01), "{:?}", r.groups);
    }

    #[test]
    fn a1_prime_classical_diverges() {
        let cov = dyadic_covering_1d();
        let r = check_a1_prime(&w(0.0), &cov, &cubes(&cov, 0, 0), &quick()).unwrap();
        assert!(!r.certified && !r.pass);
        let neg = check_a1(&w(0.0), &cov, 0.3, &[-0.1], &cubes(&cov, -1, 1), &quick()).unwrap();
        assert!(neg.pass, "{:?}", neg.groups);
    }

    #[test]
    fn a2_classical_is_zero_and_conjugated_uniform() {
        let cov = dyadic_covering_1d();
        let c = cubes(&cov, -1, 1);
        let z = check_a2(&w(0.5), &cov, 0.3, &[0.0], &c, &quick()).unwrap();
        assert!(z.constant == 0.0 && z.pass);
        let r = check_a2(&k(1.0), &cov, 0.3, &[0.0, 0.1], &c, &quick()).unwrap();
        assert!(r.pass && r.constant > 0.0, "{:?}", r.groups);
        assert!(check_a2(&k(1.0), &cov, 0.3, &[-0.1], &c, &quick()).is_err());
    }

    #[test]
    fn a3_a4_conjugated_converges_classical_does_not() {
        let cov = dyadic_covering_1d();
        let c = cubes(&cov, 0, 1);
        let r = check_a3_a4(&k(1.0), &cov, &c, &quick()).unwrap();
        assert!(r.pass, "{:?} {:?}", r.groups, r.notes);
        let cl = check_a3_a4(&w(0.0), &cov, &cubes(&cov, 0, 0), &quick()).unwrap();
        let a3 = cl.entries.iter().find(|e| e.group == "a3").unwrap();
        let a4 = cl.entries.iter().find(|e| e.group == "a4").unwrap();
        assert!(a3.certified && a3.statistic > 0.0 && !a4.certified);
    }

    #[test]
    fn envelope_integrals_uniform() {
        let cov = dyadic_covering_1d();
        let r = check_envelope_integrable(&[0.0], &cov, 0.25, &cubes(&cov, -2, 2), &quick()).unwrap();
        assert!(r.pass, "{:?}", r.groups);
        assert!(check_envelope_integrable(&[0.0], &cov, 0.6, &cubes(&cov, 0, 0), &quick()).is_err());
    }

    #[test]
    fn sup_t_cases() {
        let cov = dyadic_covering_1d();
        let c = cubes(&cov, -2, 2);
        for nu in [0.0, -0.75] {
            let r = check_sup_t_bound(nu, 0.5 * (2.0 * nu + 2.0).min(1.0), &cov, &c, &quick()).unwrap();
            assert!(r.pass, "nu={nu}: {:?}", r.groups);
        }
    }

    #[test]
    fn prop42_reduces_for_empty_classical_factor() {
        let s = VerifySettings { random_y: 0, per_decade: 2, ..VerifySettings::default() };
        let w0 = Window::new(0, 0).unwrap();
        let reps = check_prop_locnonloc(&k(1.0), &dyadic_covering_1d(), &[], 0.3, &[0.0], &[0.0], &w0, &s).unwrap();
        let own = check_a1(&k(1.0), &dyadic_covering_1d(), 0.3, &[0.0], &cubes(&dyadic_covering_1d(), 0, 0), &s).unwrap();
        assert!((reps[1].constant - own.constant).abs() < 1e-12 * own.constant);
        assert_eq!(reps[0].condition, "prop42/A0");
        let _ = qb_covering(1, 1);
    }
}
