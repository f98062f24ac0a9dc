use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use bessel_hardy::func::GridFunction;
use serde::Serialize;

/// Read a grid CSV whose header lists the axis coordinates and then the value.
pub fn read_grid(path: &Path) -> Result<GridFunction> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let width = rdr.headers()?.len();
    if width < 2 {
        bail!("{}: grid CSV needs at least one coordinate column and a value column", path.display());
    }
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let nums = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("{}: row {} is not numeric", path.display(), line + 2))?;
        points.push(nums[..width - 1].to_vec());
        values.push(nums[width - 1]);
    }
    Ok(GridFunction::from_centers(&points, &values)?)
}

pub fn grid_header(dim: usize) -> Vec<String> {
    (1..=dim).map(|k| format!("x{k}")).chain(std::iter::once("value".to_string())).collect()
}

/// CSV text with RFC 4180 quoting.
pub fn csv_text(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(vec![]);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn json_text<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Write to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn num(v: f64) -> String {
    format!("{v}")
}
