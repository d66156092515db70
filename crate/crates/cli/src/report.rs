//! Key-value reports.
//!
//! Text form is one `key=value` line per entry, keys matching
//! `[a-z0-9_.]+`, values never containing a newline. Floats are printed in
//! the shortest form that reads back to the same `f64`. The `--json-out`
//! form is a single object with the same keys in the same order.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use serde_json::{Map, Value};

#[derive(Debug, Default)]
pub struct Report {
    entries: Map<String, Value>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl Into<Value>) -> &mut Self {
        let key = key.into();
        debug_assert!(key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '.'));
        self.entries.insert(key, value.into());
        self
    }

    pub fn float(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        // JSON has no infinities; the text form still shows them.
        let v = serde_json::Number::from_f64(value).map(Value::Number).unwrap_or_else(|| Value::String(value.to_string()));
        self.put(key, v)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let v = match v {
                Value::String(s) => s.replace('\n', "\\n"),
                other => other.to_string(),
            };
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn write_json(&self, path: &Path) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(&self.entries)?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}
