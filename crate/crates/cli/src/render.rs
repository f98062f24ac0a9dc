//! Markdown and CSV rendering of JSON reports.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde_json::Value;

use crate::io::csv_text;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub markdown: String,
    /// File name and CSV text.
    pub tables: Vec<(String, String)>,
}

pub fn render(text: &str) -> Result<Document, String> {
    if text.trim().is_empty() {
        return Ok(Document::default());
    }
    let v: Value = serde_json::from_str(text).map_err(|e| format!("not a JSON report: {e}"))?;
    let obj = v.as_object().ok_or("report must be a JSON object")?;
    if obj.is_empty() {
        return Ok(Document::default());
    }
    match obj.get("schema").and_then(Value::as_u64) {
        Some(1) => {}
        Some(s) => return Err(format!("schema mismatch: expected 1, found {s}")),
        None => return Err("schema mismatch: missing schema field".into()),
    }
    if let Some(r) = obj.get("reports") {
        battery(&v, r.as_array().ok_or("reports must be an array")?)
    } else if let Some(t) = obj.get("terms") {
        decomposition(&v, t.as_array().ok_or("terms must be an array")?)
    } else if let Some(e) = obj.get("estimate") {
        h1(e)
    } else if let Some(c) = obj.get("certificates") {
        certificates(c.as_array().ok_or("certificates must be an array")?)
    } else {
        Err("schema mismatch: unrecognized report".into())
    }
}

fn fnum(v: Option<&Value>) -> String {
    match v.and_then(Value::as_f64) {
        Some(x) => format!("{x:.4e}"),
        None => "inf".into(),
    }
}

/// Full-precision value for CSV cells.
fn raw(v: Option<&Value>) -> String {
    match v {
        Some(Value::Null) | None => "inf".into(),
        Some(Value::String(s)) => s.clone(),
        Some(x) => x.to_string(),
    }
}

fn yes(v: Option<&Value>) -> &'static str {
    if v.and_then(Value::as_bool).unwrap_or(false) {
        "yes"
    } else {
        "no"
    }
}

fn text(v: Option<&Value>) -> String {
    v.and_then(Value::as_str).unwrap_or("").to_string()
}

fn ints(v: Option<&Value>) -> String {
    v.and_then(Value::as_array)
        .map(|a| a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";"))
        .unwrap_or_default()
}

fn slug(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '-' }).collect()
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> Result<String, String> {
    let h: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    csv_text(&h, rows).map_err(|e| e.to_string())
}

fn battery(root: &Value, reports: &[Value]) -> Result<Document, String> {
    if reports.is_empty() {
        return Ok(Document::default());
    }
    let mut md = String::new();
    let mut tables = Vec::new();
    writeln!(md, "# Verification report\n").unwrap();
    writeln!(
        md,
        "Overall: {}, certified: {}.\n",
        if root.get("pass").and_then(Value::as_bool).unwrap_or(false) { "pass" } else { "FAIL" },
        yes(root.get("certified"))
    )
    .unwrap();
    writeln!(md, "| # | condition | kernel | covering | constant | spread | bound | certified | pass |").unwrap();
    writeln!(md, "|---|---|---|---|---|---|---|---|---|").unwrap();
    for (i, r) in reports.iter().enumerate() {
        writeln!(
            md,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} |",
            i + 1,
            text(r.get("condition")),
            text(r.get("kernel")),
            text(r.get("covering")),
            fnum(r.get("constant")),
            fnum(r.get("spread")),
            fnum(r.get("spread_bound")),
            yes(r.get("certified")),
            yes(r.get("pass")),
        )
        .unwrap();
    }
    for (i, r) in reports.iter().enumerate() {
        let cond = text(r.get("condition"));
        let name = format!("{:02}-{}.csv", i + 1, slug(&cond));
        writeln!(md, "\n## {}. {} ({})\n", i + 1, cond, text(r.get("kernel"))).unwrap();
        if let Some(env) = r.get("envelope").and_then(Value::as_array) {
            writeln!(md, "Fitted envelope: C = {}, c = {}.\n", fnum(env.first()), fnum(env.get(1))).unwrap();
        }
        if let Some(groups) = r.get("groups").and_then(Value::as_array) {
            for g in groups {
                writeln!(
                    md,
                    "- group {}: min {}, max {}, spread {}, {}",
                    text(g.get("group")),
                    fnum(g.get("min")),
                    fnum(g.get("max")),
                    fnum(g.get("spread")),
                    if g.get("pass").and_then(Value::as_bool).unwrap_or(false) { "pass" } else { "FAIL" }
                )
                .unwrap();
            }
            md.push('\n');
        }
        writeln!(md, "| group | levels | diameter | statistic | error | certified |").unwrap();
        writeln!(md, "|---|---|---|---|---|---|").unwrap();
        let mut rows = Vec::new();
        for e in r.get("entries").and_then(Value::as_array).map(Vec::as_slice).unwrap_or(&[]) {
            writeln!(
                md,
                "| {} | {} | {} | {} | {} | {} |",
                text(e.get("group")),
                ints(e.get("levels")),
                fnum(e.get("diameter")),
                fnum(e.get("statistic")),
                fnum(e.get("error")),
                yes(e.get("certified")),
            )
            .unwrap();
            rows.push(vec![
                text(e.get("group")),
                ints(e.get("levels")),
                ints(e.get("index")),
                raw(e.get("diameter")),
                raw(e.get("statistic")),
                raw(e.get("error")),
                yes(e.get("certified")).into(),
            ]);
        }
        for note in r.get("notes").and_then(Value::as_array).map(Vec::as_slice).unwrap_or(&[]) {
            writeln!(md, "\nNote: {}", note.as_str().unwrap_or("")).unwrap();
        }
        writeln!(md, "\nTable: `{name}`").unwrap();
        tables.push((name, csv(&["group", "levels", "index", "diameter", "statistic", "error", "certified"], &rows)?));
    }
    Ok(Document { markdown: md, tables })
}

fn decomposition(root: &Value, terms: &[Value]) -> Result<Document, String> {
    let mut hist: BTreeMap<i64, (usize, usize)> = BTreeMap::new();
    let mut zero = 0;
    for t in terms {
        let lambda = t.get("lambda").and_then(Value::as_f64).unwrap_or(0.0).abs();
        if lambda == 0.0 {
            zero += 1;
            continue;
        }
        let slot = hist.entry(lambda.log2().floor() as i64).or_default();
        if text(t.get("kind")) == "local" {
            slot.0 += 1;
        } else {
            slot.1 += 1;
        }
    }
    let mut md = String::new();
    writeln!(md, "# Atomic decomposition\n").unwrap();
    writeln!(
        md,
        "{} terms ({} local, {} cancellative), depth {}, sum of |lambda| {}, reconstruction error {}.\n",
        terms.len(),
        raw(root.get("local")),
        raw(root.get("cancellative")),
        raw(root.get("depth")),
        fnum(root.get("total_l1")),
        fnum(root.get("reconstruction_max_error")),
    )
    .unwrap();
    if zero > 0 {
        writeln!(md, "{zero} terms have lambda = 0.\n").unwrap();
    }
    writeln!(md, "| log2 bin | lambda from | lambda to | local | cancellative |").unwrap();
    writeln!(md, "|---|---|---|---|---|").unwrap();
    let mut rows = Vec::new();
    for (&b, &(l, c)) in &hist {
        let lo = 2f64.powi(b as i32);
        writeln!(md, "| {b} | {lo:.4e} | {:.4e} | {l} | {c} |", 2.0 * lo).unwrap();
        rows.push(vec![b.to_string(), format!("{lo}"), format!("{}", 2.0 * lo), l.to_string(), c.to_string()]);
    }
    writeln!(md, "\nTable: `lambda_histogram.csv`").unwrap();
    let table = csv(&["log2_bin", "lambda_lo", "lambda_hi", "local", "cancellative"], &rows)?;
    Ok(Document { markdown: md, tables: vec![("lambda_histogram.csv".into(), table)] })
}

fn h1(est: &Value) -> Result<Document, String> {
    let mut md = String::new();
    let mut rows = Vec::new();
    writeln!(md, "# Hardy norm estimate\n").unwrap();
    writeln!(md, "| route | kernel | value | error | nodes | times |").unwrap();
    writeln!(md, "|---|---|---|---|---|---|").unwrap();
    for route in ["direct", "conjugated"] {
        let Some(r) = est.get(route).filter(|r| !r.is_null()) else { continue };
        writeln!(
            md,
            "| {route} | {} | {} | {} | {} | {} |",
            text(r.get("kernel")),
            fnum(r.get("value")),
            fnum(r.get("error")),
            raw(r.get("nodes")),
            raw(r.get("times")),
        )
        .unwrap();
        rows.push(vec![route.into(), text(r.get("kernel")), raw(r.get("value")), raw(r.get("error"))]);
    }
    if let Some(d) = est.get("discrepancy").filter(|d| !d.is_null()) {
        writeln!(md, "\nDiscrepancy {}; routes agree: {}.", fnum(Some(d)), yes(est.get("routes_agree"))).unwrap();
    }
    let table = csv(&["route", "kernel", "value", "error"], &rows)?;
    Ok(Document { markdown: md, tables: vec![("h1_routes.csv".into(), table)] })
}

fn certificates(certs: &[Value]) -> Result<Document, String> {
    let mut md = String::new();
    let mut rows = Vec::new();
    writeln!(md, "# Atom validation\n").unwrap();
    writeln!(md, "| # | kind | valid | size | integral | violations |").unwrap();
    writeln!(md, "|---|---|---|---|---|---|").unwrap();
    for (i, c) in certs.iter().enumerate() {
        let violations = c
            .get("violations")
            .and_then(Value::as_array)
            .map(|a| a.iter().map(|v| text(v.get("kind"))).collect::<Vec<_>>().join(";"))
            .unwrap_or_default();
        writeln!(
            md,
            "| {} | {} | {} | {} | {} | {} |",
            i + 1,
            text(c.get("kind")),
            yes(c.get("valid")),
            fnum(c.get("size")),
            fnum(c.get("integral")),
            violations
        )
        .unwrap();
        rows.push(vec![
            (i + 1).to_string(),
            text(c.get("kind")),
            yes(c.get("valid")).into(),
            raw(c.get("size")),
            raw(c.get("integral")),
            violations,
        ]);
    }
    let table = csv(&["atom", "kind", "valid", "size", "integral", "violations"], &rows)?;
    Ok(Document { markdown: md, tables: vec![("atoms.csv".into(), table)] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_inputs_give_empty_documents() {
        assert_eq!(render("").unwrap(), Document::default());
        assert_eq!(render("{}").unwrap(), Document::default());
        assert_eq!(render(r#"{"schema": 1, "reports": []}"#).unwrap(), Document::default());
    }

    #[test]
    fn schema_is_checked() {
        assert!(render(r#"{"schema": 2, "reports": []}"#).is_err());
        assert!(render(r#"{"reports": []}"#).is_err());
        assert!(render(r#"{"schema": 1, "other": 3}"#).is_err());
        assert!(render("[1, 2]").is_err());
    }

    #[test]
    fn histogram_bins_by_power_of_two() {
        let doc = render(
            r#"{"schema": 1, "terms": [
                {"lambda": 0.75, "kind": "local"},
                {"lambda": -0.5, "kind": "cancellative"},
                {"lambda": 3.0, "kind": "cancellative"}
            ]}"#,
        )
        .unwrap();
        let csv = &doc.tables[0].1;
        assert!(csv.contains("-1,0.5,1,1,1\r\n"));
        assert!(csv.contains("1,2,4,0,1\r\n"));
    }
}
