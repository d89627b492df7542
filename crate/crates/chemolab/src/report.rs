//! Flat `key = value` reports with a JSON mirror.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), so the text
//! is bit-exact and identical across runs.

use std::path::Path;

use serde_json::{Map, Number, Value as Json};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as u64)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Int(x)
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

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

impl Value {
    fn text(&self) -> String {
        match self {
            Value::Float(x) => format_float(*x),
            Value::Int(n) => n.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Float(x) => {
                // round-trip through the printed form so both files agree
                let printed: f64 = format_float(*x).parse().unwrap_or(*x);
                Number::from_f64(printed).map_or_else(|| Json::String(format_float(*x)), Json::Number)
            }
            Value::Int(n) => Json::Number((*n).into()),
            Value::Bool(b) => Json::Bool(*b),
            Value::Text(s) => Json::String(s.clone()),
        }
    }
}

/// Insertion-ordered report entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, Value)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an entry. Keys must be unique.
    pub fn put(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        let key = key.into();
        debug_assert!(self.get(&key).is_none(), "duplicate report key {key}");
        self.entries.push((key, value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn entries(&self) -> &[(String, Value)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v.text());
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let map: Map<String, Json> = self.entries.iter().map(|(k, v)| (k.clone(), v.json())).collect();
        let mut s = serde_json::to_string_pretty(&Json::Object(map)).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, text_path: &Path, json_path: &Path) -> Result<()> {
        write_file(text_path, &self.to_text())?;
        write_file(json_path, &self.to_json())
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}
