//! Tabular reports and their CSV and JSON encodings.

use crate::config::{Command, Format};
use serde_json::{json, Map, Value as Json};
use std::fmt::Write as _;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Int(x as i64)
    }
}

impl From<i64> for Value {
    fn from(x: i64) -> Self {
        Value::Int(x)
    }
}

impl From<u32> for Value {
    fn from(x: u32) -> Self {
        Value::Int(x as i64)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Text(x)
    }
}

/// Twelve significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.11e}")
    }
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::Int(x) => x.to_string(),
            Value::Float(x) => format_float(*x),
            Value::Bool(x) => x.to_string(),
            Value::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Value::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Int(x) => json!(x),
            Value::Float(x) if x.is_finite() => {
                json!(format_float(*x)
                    .parse::<f64>()
                    .expect("formatted float parses"))
            }
            Value::Float(_) => Json::Null,
            Value::Bool(x) => json!(x),
            Value::Text(s) => json!(s),
        }
    }
}

/// Pass and failure counts plus named statistics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    /// Exact identities and oracle comparisons evaluated.
    pub checks: u64,
    /// Of those, how many failed. Any failure makes the run exit nonzero.
    pub failures: u64,
    /// Measured values above a stated bound. Reported, never fatal.
    pub bound_exceedances: u64,
    pub stats: Vec<(String, Value)>,
}

impl Summary {
    pub fn check(&mut self, ok: bool) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
        }
    }

    pub fn bound(&mut self, within: bool) {
        if !within {
            self.bound_exceedances += 1;
        }
    }

    pub fn stat(&mut self, name: &str, value: impl Into<Value>) {
        self.stats.push((name.to_string(), value.into()));
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.stats.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: Command,
    pub seed: u64,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub summary: Summary,
}

impl Report {
    pub fn new(command: Command, seed: u64, columns: &[&'static str]) -> Self {
        Report {
            command,
            seed,
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: Summary::default(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn passed(&self) -> bool {
        self.summary.failures == 0
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# schema={SCHEMA}\n# command={} seed={}\n",
            self.command.name(),
            self.seed
        );
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Json> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, v)| (k.to_string(), v.json()))
                    .collect();
                Json::Object(obj)
            })
            .collect();
        let mut summary = Map::new();
        summary.insert("checks".into(), json!(self.summary.checks));
        summary.insert("failures".into(), json!(self.summary.failures));
        summary.insert(
            "bound_exceedances".into(),
            json!(self.summary.bound_exceedances),
        );
        for (k, v) in &self.summary.stats {
            summary.insert(k.clone(), v.json());
        }
        let doc = json!({
            "schema": SCHEMA,
            "command": self.command.name(),
            "seed": self.seed,
            "rows": rows,
            "summary": summary,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// One line: counts and the named statistics.
    pub fn summary_line(&self) -> String {
        let s = &self.summary;
        let mut line = format!(
            "{}: {} rows, {} checks, {} failures, {} bound exceedances",
            self.command.name(),
            self.rows.len(),
            s.checks,
            s.failures,
            s.bound_exceedances
        );
        for (k, v) in &s.stats {
            let _ = write!(line, ", {k}={}", v.csv());
        }
        line
    }
}
