//! Reports shared by every subcommand, rendered as aligned text or JSON.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: u32 = 1;

/// One table row; columns keep their insertion order in both formats.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Row(Vec<(String, Value)>);

impl Row {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<Value>) -> Self {
        self.0.push((key.into(), value.into()));
        self
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.0.push((key.into(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    pub fn columns(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|(k, _)| k.as_str())
    }
}

impl Serialize for Row {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub method: String,
    pub input: String,
    pub params: Row,
    pub results: Vec<Row>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub asserts: Vec<Row>,
    /// Only compare runs list disagreements; an empty list is still printed
    /// there so that "none" is explicit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disagreements: Option<Vec<Row>>,
    /// Microseconds per phase; empty unless requested, so that reports stay
    /// byte-reproducible by default.
    pub timings: BTreeMap<&'static str, u64>,
}

impl Report {
    pub fn new(command: &'static str, method: impl Into<String>, input: &str) -> Self {
        Report {
            schema: SCHEMA,
            tool: "workbench",
            version: env!("CARGO_PKG_VERSION"),
            command,
            method: method.into(),
            input: input.to_string(),
            params: Row::new(),
            results: Vec::new(),
            asserts: Vec::new(),
            disagreements: None,
            timings: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("workbench {}  method={}  input={}\n", self.command, self.method, self.input);
        if !self.params.0.is_empty() {
            let parts: Vec<String> = self.params.0.iter().map(|(k, v)| format!("{k}={}", plain(v))).collect();
            out += &parts.join("  ");
            out.push('\n');
        }
        out.push('\n');
        out += &table(&self.results);
        if !self.asserts.is_empty() {
            out += "\nasserts\n";
            out += &table(&self.asserts);
        }
        if let Some(d) = &self.disagreements {
            out += "\ndisagreements\n";
            if d.is_empty() {
                out += "none\n";
            } else {
                out += &table(d);
            }
        }
        if !self.timings.is_empty() {
            out += "\ntimings (us)\n";
            for (k, v) in &self.timings {
                let _ = writeln!(out, "{k:<12} {v}");
            }
        }
        out
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

/// Columns are the union over rows, in first-seen order.
fn table(rows: &[Row]) -> String {
    let mut cols: Vec<&str> = Vec::new();
    for r in rows {
        for c in r.columns() {
            if !cols.contains(&c) {
                cols.push(c);
            }
        }
    }
    let cells: Vec<Vec<String>> = rows.iter().map(|r| cols.iter().map(|c| r.get(c).map(plain).unwrap_or_else(|| "-".into())).collect()).collect();
    let widths: Vec<usize> = cols
        .iter()
        .enumerate()
        .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
        .collect();
    let line = |items: Vec<&str>| {
        let padded: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(cols.clone());
    for r in &cells {
        out += &line(r.iter().map(String::as_str).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_keeps_column_order() {
        let r = Row::new().with("site", 3).with("block", "a");
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"site":3,"block":"a"}"#);
    }

    #[test]
    fn text_table_aligns_columns() {
        let rows = vec![Row::new().with("site", 0).with("verdict", "always-miss"), Row::new().with("site", 12).with("verdict", Value::Null)];
        assert_eq!(table(&rows), "site  verdict\n0     always-miss\n12    -\n");
    }

    #[test]
    fn json_schema_fields() {
        let mut r = Report::new("cache", "exact", "x.ag");
        r.results.push(Row::new().with("site", 0));
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        for k in ["schema", "tool", "version", "method", "input", "results", "timings"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert_eq!(v["schema"], 1);
        assert!(v.get("disagreements").is_none());
    }
}
