//! Run reports and their JSON / text renderings.

use serde::Serialize;
use serde_json::{Map, Value};

/// Significant digits kept for every float in a report.
const REPORT_DIGITS: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Passing means value <= threshold.
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value <= threshold }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
    pub pass: bool,
    pub wall_time_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Text => "txt",
        }
    }
}

fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", REPORT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Round every float; object keys come out sorted because `Map` is a BTreeMap.
fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_significant(n.as_f64().unwrap_or(f64::NAN));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, normalize(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

impl RunReport {
    pub fn to_value(&self) -> Value {
        normalize(serde_json::to_value(self).expect("report is always serializable"))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_value()).expect("value serializes");
                s.push('\n');
                s
            }
            Format::Text => self.to_text(),
        }
    }

    fn to_text(&self) -> String {
        let mut out = format!("command: {}\nresult: {}\n", self.command, if self.pass { "PASS" } else { "FAIL" });
        let v = self.to_value();
        if let Some(results) = v.get("results").and_then(Value::as_object) {
            for (key, value) in results {
                match value {
                    Value::Array(rows) if rows.iter().all(Value::is_object) && !rows.is_empty() => {
                        if !out.ends_with("\n\n") {
                            out.push('\n');
                        }
                        out.push_str(&format!("{key}:\n"));
                        out.push_str(&table(rows));
                        out.push('\n');
                    }
                    Value::Array(_) | Value::Object(_) => {}
                    scalar => out.push_str(&format!("{key}: {}\n", scalar_text(scalar))),
                }
            }
        }
        if !out.ends_with("\n\n") {
            out.push('\n');
        }
        out.push_str("checks:\n");
        let rows: Vec<Vec<String>> = self
            .checks
            .iter()
            .map(|c| {
                vec![
                    c.name.clone(),
                    format!("{:.6e}", c.value),
                    format!("<= {:.3e}", c.threshold),
                    if c.pass { "PASS" } else { "FAIL" }.to_string(),
                ]
            })
            .collect();
        out.push_str(&aligned(&["name", "value", "threshold", "status"], &rows));
        if !self.artifacts.is_empty() {
            out.push_str("\nartifacts:\n");
            for a in &self.artifacts {
                out.push_str(&format!("  {a}\n"));
            }
        }
        out
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => format!("{:.10e}", n.as_f64().unwrap_or(f64::NAN)),
        other => other.to_string(),
    }
}

/// One row per object, scalar fields only, columns in key order.
fn table(rows: &[Value]) -> String {
    let mut headers: Vec<String> = Vec::new();
    for row in rows {
        for (k, v) in row.as_object().into_iter().flatten() {
            if !v.is_array() && !v.is_object() && !headers.contains(k) {
                headers.push(k.clone());
            }
        }
    }
    headers.sort();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|row| headers.iter().map(|h| row.get(h).map_or(String::new(), scalar_text)).collect())
        .collect();
    let refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    aligned(&refs, &body)
}

fn aligned(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        format!("  {}\n", padded.join("  ").trim_end())
    };
    let mut out = line(headers.to_vec());
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_significant(0.1 + 0.2), 0.3);
        assert_eq!(round_significant(1.234567890123456e-7), 1.23456789012e-7);
        assert_eq!(round_significant(0.0), 0.0);
        assert!(round_significant(f64::NAN).is_nan());
    }

    #[test]
    fn normalized_keys_are_sorted() {
        let v = normalize(json!({"b": 1.00000000000001, "a": [2.5, {"d": 1, "c": 0.30000000000000004}]}));
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"a":[2.5,{"c":0.3,"d":1}],"b":1.0}"#);
    }

    #[test]
    fn nan_never_passes() {
        assert!(Check::at_most("r", 1e-10, 1e-9).pass);
        assert!(!Check::at_most("r", 1e-8, 1e-9).pass);
        assert!(!Check::at_most("r", f64::NAN, 1e-9).pass);
    }

    #[test]
    fn text_has_one_row_per_level() {
        let report = RunReport {
            command: "spectrum".into(),
            config: json!({}),
            results: json!({"path": "shifted", "levels": [{"n": 1, "re": 0.5}, {"n": 2, "re": 2.0}]}),
            checks: vec![Check::at_most("x", 0.0, 1.0)],
            artifacts: vec!["a.csv".into()],
            pass: true,
            wall_time_s: 0.0,
        };
        let text = report.render(Format::Text);
        assert!(text.contains("result: PASS"));
        assert!(text.contains("path: shifted"));
        let level_rows = text.lines().filter(|l| l.trim_start().starts_with(['1', '2'])).count();
        assert_eq!(level_rows, 2, "{text}");
    }
}
