use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context, Result};
use bessel_hardy::atoms::{localize_and_decompose, validate_atom, Atom, AtomCertificate, AtomKind, Decomposition};
use bessel_hardy::config::Config;
use bessel_hardy::covering::{check_covering, window_box, Cuboid, Element};
use bessel_hardy::func::{Cell, CellFunction};
use bessel_hardy::kernel::{kernel_product, KernelSpec};
use bessel_hardy::maximal::{h1_norm_estimate, H1Estimate};
use bessel_hardy::measure::{
    measure_ball_box, measure_ball_comparable, measure_ball_exact, measure_ball_multidim_comparable, measure_interval,
    Flavor, Interval,
};
use bessel_hardy::specfun::{bessel_i, bessel_i_eval, BesselOrder, Regime};
use bessel_hardy::verify::{run_battery, run_condition, BatteryReport, ConditionReport};
use bessel_hardy::{par, Error};
use serde::{Deserialize, Serialize};

use crate::args::{AtomsOp, Cli, Command, Common, CoveringOp, KernelOp, MeasureOp, ReportOp, Route, SpecfunOp};
use crate::io::{csv_text, emit, grid_header, json_text, num, read_grid};
use crate::render::render;
use crate::Outcome;

pub const SCHEMA: u32 = 1;
pub const THREADS_ENV: &str = "BESSEL_HARDY_THREADS";

pub fn execute(cli: Cli) -> Result<Outcome> {
    let common = cli.common;
    let out = common.out.clone();
    let out = out.as_deref();
    match cli.command {
        Command::Specfun { op: SpecfunOp::Eval { tau, x } } => specfun_eval(tau, &x, out),
        Command::Measure { op } => {
            let cfg = resolve(&common)?;
            measure(&cfg, op, out)
        }
        Command::Kernel { op: KernelOp::Eval { t, x, y, route } } => {
            let cfg = resolve(&common)?;
            kernel_eval(&cfg, t, &x, &y, route, out)
        }
        Command::Covering { op } => {
            let cfg = resolve(&common)?;
            covering(&cfg, op, out)
        }
        Command::Atoms { op: AtomsOp::Decompose { input } } => {
            let cfg = resolve(&common)?;
            atoms_decompose(&cfg, &input, out)
        }
        Command::Atoms { op: AtomsOp::Validate { input } } => {
            let cfg = resolve(&common)?;
            atoms_validate(&cfg, &input, out)
        }
        Command::H1norm { input, profile } => {
            let cfg = resolve(&common)?;
            h1norm(&cfg, &input, profile.as_deref(), out)
        }
        Command::Verify { target, condition } => {
            let cfg = resolve(&common)?;
            verify(&cfg, target.as_deref(), condition.as_deref(), out)
        }
        Command::Report { op: ReportOp::Render { input } } => report_render(&input, out),
    }
}

fn parse_flavor(s: &str) -> Result<Flavor> {
    match s.trim() {
        "classical" | "c" => Ok(Flavor::Classical),
        "exotic" | "e" => Ok(Flavor::Exotic),
        other => Err(Error::Config(format!("unknown flavor {other}")).into()),
    }
}

fn parse_window(s: &str) -> Result<[i64; 2]> {
    let bad = || Error::Config(format!("window must be LO:HI, got {s}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok([a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?])
}

fn default_covering(flavors: &[Flavor]) -> String {
    if flavors.contains(&Flavor::Exotic) {
        "qb".into()
    } else if flavors.len() == 1 {
        "dyadic".into()
    } else {
        format!("box:{}", flavors.len())
    }
}

/// Config file overlaid with the command-line flags, validated.
pub fn resolve(common: &Common) -> Result<Config> {
    let (mut cfg, file_covering, file_flavors) = match &common.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let has = |key: &str| {
                serde_json::from_str::<serde_json::Value>(&text).map(|v| v.get(key).is_some()).unwrap_or(false)
            };
            let (c, f) = (has("covering"), has("flavors"));
            (Config::from_json(&text)?, c, f)
        }
        None => (Config::default(), false, false),
    };
    if let Some(nu) = &common.nu {
        cfg.nu = nu.clone();
        if common.flavors.is_none() && (!file_flavors || cfg.flavors.len() != nu.len()) {
            cfg.flavors = vec![Flavor::Classical; nu.len()];
        }
    }
    if let Some(f) = &common.flavors {
        cfg.flavors = f.iter().map(|s| parse_flavor(s)).collect::<Result<_>>()?;
    }
    match &common.covering {
        Some(c) => cfg.covering = c.clone(),
        None if !file_covering && (common.nu.is_some() || common.flavors.is_some()) => {
            cfg.covering = default_covering(&cfg.flavors)
        }
        None => {}
    }
    if let Some(w) = &common.window {
        cfg.window = parse_window(w)?;
    }
    if let Some(g) = common.gamma {
        cfg.gamma = Some(g);
    }
    if let Some(d) = &common.delta {
        cfg.deltas = d.clone();
    }
    if let Some(k) = common.kappa {
        cfg.kappa = k;
    }
    if let Some(d) = common.depth {
        cfg.depth = d;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let threads = match (common.threads, std::env::var(THREADS_ENV)) {
        (Some(t), _) => Some(t),
        (None, Ok(v)) => Some(v.trim().parse::<usize>().map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer")))?),
        (None, Err(_)) => None,
    };
    if let Some(t) = threads {
        cfg.threads = Some(t);
    }
    cfg.validate()?;
    if let Some(t) = cfg.threads {
        par::init_threads(t);
    }
    Ok(cfg)
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

#[derive(Serialize)]
struct BesselRow {
    tau: f64,
    x: f64,
    /// `None` when `I_τ(x)` overflows.
    value: Option<f64>,
    scaled: f64,
    regime: Regime,
    rel_error: f64,
    terms: usize,
}

fn specfun_eval(tau: f64, xs: &[f64], out: Option<&Path>) -> Result<Outcome> {
    let order = BesselOrder::new(tau)?;
    let mut rows = Vec::with_capacity(xs.len());
    for &x in xs {
        let e = bessel_i_eval(order, x)?;
        let value = match bessel_i(order, x) {
            Ok(v) => Some(v),
            Err(Error::Overflow(_)) => None,
            Err(err) => return Err(err.into()),
        };
        rows.push(BesselRow { tau, x, value, scaled: e.scaled, regime: e.regime, rel_error: e.rel_error, terms: e.terms });
    }
    emit(out, &json_text(&serde_json::json!({ "schema": SCHEMA, "values": rows }))?)?;
    Ok(Outcome::Ok)
}

fn measure(cfg: &Config, op: MeasureOp, out: Option<&Path>) -> Result<Outcome> {
    let nu = cfg.nu_vector()?;
    let eff = nu.effective();
    let body = match op {
        MeasureOp::Ball { x, r } => {
            if x.len() != eff.len() {
                return Err(Error::DimensionMismatch { expected: eff.len(), found: x.len() }.into());
            }
            let (exact, comparable) = if eff.len() == 1 {
                (measure_ball_exact(eff[0], x[0], r)?, measure_ball_comparable(eff[0], x[0], r)?)
            } else {
                (measure_ball_box(&eff, &x, r), measure_ball_multidim_comparable(&nu, &x, r)?)
            };
            serde_json::json!({
                "schema": SCHEMA, "config": cfg, "x": x, "r": r,
                "exact": exact, "comparable": comparable, "ratio": exact / comparable,
            })
        }
        MeasureOp::Interval { a, b } => {
            if eff.len() != 1 {
                bail!(Error::Config("interval measure needs a single axis".into()));
            }
            let m = measure_interval(eff[0], &Interval::new(a, b)?)?;
            serde_json::json!({ "schema": SCHEMA, "config": cfg, "a": a, "b": b, "measure": m })
        }
    };
    emit(out, &json_text(&body)?)?;
    Ok(Outcome::Ok)
}

fn kernel_eval(cfg: &Config, t: f64, x: &[f64], y: &[f64], route: Route, out: Option<&Path>) -> Result<Outcome> {
    let nu = cfg.nu_vector()?;
    let spec = match route {
        Route::Semigroup => KernelSpec::semigroup(&nu)?,
        Route::Conjugated => KernelSpec::conjugated(&nu)?,
    };
    let value = kernel_product(&spec, t, x, y)?;
    let body = serde_json::json!({
        "schema": SCHEMA, "config": cfg, "kernel": spec.label(),
        "route": match route { Route::Semigroup => "semigroup", Route::Conjugated => "conjugated" },
        "t": t, "x": x, "y": y, "value": value,
    });
    emit(out, &json_text(&body)?)?;
    Ok(Outcome::Ok)
}

fn covering(cfg: &Config, op: CoveringOp, out: Option<&Path>) -> Result<Outcome> {
    let cov = cfg.covering()?;
    let w = cfg.window()?;
    match op {
        CoveringOp::Dump => {
            let (lo, hi) = window_box(&cov, &w);
            let elements = cov.elements_in_box(&lo, &hi, &w)?;
            let il = cov.index_len();
            let d = cov.dim();
            let header: Vec<String> = (1..=il)
                .map(|k| format!("i{k}"))
                .chain((1..=d).map(|k| format!("lo{k}")))
                .chain((1..=d).map(|k| format!("hi{k}")))
                .collect();
            let rows: Vec<Vec<String>> = elements
                .iter()
                .map(|e| {
                    e.index
                        .iter()
                        .map(|i| i.to_string())
                        .chain(e.cube.lower().iter().map(|&v| num(v)))
                        .chain(e.cube.upper().iter().map(|&v| num(v)))
                        .collect()
                })
                .collect();
            emit(out, &csv_text(&header, &rows)?)?;
            Ok(Outcome::Ok)
        }
        CoveringOp::Check { points, max_elements } => {
            let report = check_covering(&cov, &w, points, max_elements, cfg.seed)?;
            let pass = report.pass;
            emit(out, &json_text(&serde_json::json!({ "schema": SCHEMA, "config": cfg, "report": report }))?)?;
            Ok(if pass { Outcome::Ok } else { Outcome::Failed })
        }
    }
}

/// One atom as it appears in decomposition reports and validation input.
#[derive(Debug, Serialize, Deserialize)]
pub struct AtomRecord {
    #[serde(default)]
    pub lambda: Option<f64>,
    pub kind: String,
    pub host_index: Vec<i64>,
    #[serde(default)]
    pub host_lower: Option<Vec<f64>>,
    #[serde(default)]
    pub host_upper: Option<Vec<f64>>,
    pub support_lower: Vec<f64>,
    pub support_upper: Vec<f64>,
    pub cells: Vec<Cell>,
}

#[derive(Serialize)]
struct DecompositionReport<'a> {
    schema: u32,
    config: &'a Config,
    total_l1: f64,
    depth: u32,
    local: usize,
    cancellative: usize,
    reconstruction_max_error: f64,
    all_valid: bool,
    terms: Vec<AtomRecord>,
}

fn kind_name(k: AtomKind) -> &'static str {
    match k {
        AtomKind::Local => "local",
        AtomKind::Cancellative => "cancellative",
    }
}

fn record(lambda: f64, a: &Atom) -> AtomRecord {
    AtomRecord {
        lambda: Some(lambda),
        kind: kind_name(a.kind).into(),
        host_index: a.host.index.clone(),
        host_lower: Some(a.host.cube.lower().to_vec()),
        host_upper: Some(a.host.cube.upper().to_vec()),
        support_lower: a.support.lower().to_vec(),
        support_upper: a.support.upper().to_vec(),
        cells: a.cells.cells.clone(),
    }
}

fn atoms_decompose(cfg: &Config, input: &Path, out: Option<&Path>) -> Result<Outcome> {
    let nu = cfg.nu_vector()?;
    let cov = cfg.covering()?;
    let f = read_grid(input)?.to_cells();
    let dec: Decomposition = localize_and_decompose(&f, &cov, &nu, cfg.depth, &cfg.window()?)?;
    let reconstruction_max_error =
        f.cells.iter().map(|c| (c.value - dec.evaluate(&c.center())).abs()).fold(0.0, f64::max);
    let all_valid = dec.terms.iter().all(|t| validate_atom(&t.atom, &cov, &nu).valid);
    let report = DecompositionReport {
        schema: SCHEMA,
        config: cfg,
        total_l1: dec.total_l1,
        depth: dec.depth,
        local: dec.count(AtomKind::Local),
        cancellative: dec.count(AtomKind::Cancellative),
        reconstruction_max_error,
        all_valid,
        terms: dec.terms.iter().map(|t| record(t.lambda, &t.atom)).collect(),
    };
    emit(out, &json_text(&report)?)?;
    Ok(if all_valid { Outcome::Ok } else { Outcome::Failed })
}

fn atom_from_record(r: &AtomRecord, cfg: &Config) -> Result<Atom> {
    let kind = match r.kind.as_str() {
        "local" => AtomKind::Local,
        "cancellative" => AtomKind::Cancellative,
        other => bail!(Error::InvalidAtom(format!("unknown atom kind {other}"))),
    };
    let host = match (&r.host_lower, &r.host_upper) {
        (Some(lo), Some(hi)) => Element { index: r.host_index.clone(), cube: Cuboid::new(lo.clone(), hi.clone())? },
        _ => cfg.covering()?.element(&r.host_index)?,
    };
    let support = Cuboid::new(r.support_lower.clone(), r.support_upper.clone())?;
    let cells = CellFunction::new(support.dim(), r.cells.clone())?;
    Ok(Atom { kind, host, support, cells })
}

fn atoms_validate(cfg: &Config, input: &Path, out: Option<&Path>) -> Result<Outcome> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).context("atom input is not JSON")?;
    let records: Vec<AtomRecord> = match value.get("terms") {
        Some(t) => serde_json::from_value(t.clone()),
        None => serde_json::from_value(value).map(|r| vec![r]),
    }
    .map_err(|e| Error::InvalidAtom(e.to_string()))?;
    let nu = cfg.nu_vector()?;
    let cov = cfg.covering()?;
    let certificates: Vec<AtomCertificate> = records
        .iter()
        .map(|r| atom_from_record(r, cfg).map(|a| validate_atom(&a, &cov, &nu)))
        .collect::<Result<_>>()?;
    let valid = certificates.iter().all(|c| c.valid);
    let body = serde_json::json!({ "schema": SCHEMA, "config": cfg, "valid": valid, "certificates": certificates });
    emit(out, &json_text(&body)?)?;
    Ok(if valid { Outcome::Ok } else { Outcome::Failed })
}

#[derive(Serialize)]
struct H1Report<'a> {
    schema: u32,
    config: &'a Config,
    estimate: &'a H1Estimate,
}

fn h1norm(cfg: &Config, input: &Path, profile: Option<&Path>, out: Option<&Path>) -> Result<Outcome> {
    let nu = cfg.nu_vector()?;
    let f = read_grid(input)?;
    let estimate = h1_norm_estimate(&f, &nu, &cfg.quadrature)?;
    if let Some(p) = profile {
        let axes = &estimate.profile.axes;
        let mut rows = Vec::with_capacity(estimate.profile.values.len());
        for (flat, &v) in estimate.profile.values.iter().enumerate() {
            let mut rest = flat;
            let mut coords = vec![0.0; axes.len()];
            for k in (0..axes.len()).rev() {
                coords[k] = axes[k][rest % axes[k].len()];
                rest /= axes[k].len();
            }
            rows.push(coords.into_iter().chain(std::iter::once(v)).map(num).collect());
        }
        emit(Some(p), &csv_text(&grid_header(axes.len()), &rows)?)?;
    }
    emit(out, &json_text(&H1Report { schema: SCHEMA, config: cfg, estimate: &estimate })?)?;
    Ok(if estimate.routes_agree == Some(false) { Outcome::Failed } else { Outcome::Ok })
}

/// 0 when everything passes, 2 when a certified check fails, 3 when only
/// uncertified checks are left.
pub fn verdict(reports: &[ConditionReport]) -> Outcome {
    if reports.iter().all(|r| r.pass) {
        Outcome::Ok
    } else if reports.iter().any(|r| r.certified && !r.pass) {
        Outcome::Failed
    } else {
        Outcome::Uncertified
    }
}

fn verify(cfg: &Config, target: Option<&str>, condition: Option<&str>, out: Option<&Path>) -> Result<Outcome> {
    let report = match (target, condition) {
        (Some("all"), None) => run_battery(cfg, now_unix())?,
        (None, Some(c)) => {
            let reports = run_condition(cfg, c)?;
            if reports.is_empty() {
                bail!(Error::Config(format!("condition {c} has no kernel to check for these axes (A1, A2, a3a4 and prop42 need an exotic axis)")));
            }
            BatteryReport::new(cfg.clone(), reports, now_unix())
        }
        (Some(t), _) if t != "all" => bail!(Error::Config(format!("unknown verify target {t}; use `all` or --condition"))),
        _ => bail!(Error::Config("give either `all` or --condition".into())),
    };
    for r in report.reports.iter().filter(|r| !r.pass) {
        eprintln!(
            "{} on {} with {}: spread {:.3} (bound {}), certified {}",
            r.condition, r.covering, r.kernel, r.spread, r.spread_bound, r.certified
        );
    }
    emit(out, &json_text(&report)?)?;
    Ok(verdict(&report.reports))
}

fn report_render(input: &Path, out: Option<&Path>) -> Result<Outcome> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let doc = render(&text).map_err(|e| anyhow!(Error::Config(format!("{}: {e}", input.display()))))?;
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            fs::write(dir.join("report.md"), &doc.markdown)?;
            for (name, csv) in &doc.tables {
                fs::write(dir.join(name), csv)?;
            }
        }
        None => emit(None, &doc.markdown)?,
    }
    Ok(Outcome::Ok)
}
