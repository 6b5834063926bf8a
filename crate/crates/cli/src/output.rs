//! Machine-readable writers. CSV numbers carry 17 significant digits, JSON
//! uses shortest round-trip formatting; both are exact on re-read.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde_json::{json, Map, Value};

use quietlaser_core::{SpectralCurve, SCHEMA_VERSION};

/// Effective settings of one run, echoed into every file it writes.
#[derive(Debug, Clone, Default)]
pub struct RunHeader {
    pub command: &'static str,
    pub config: Vec<(&'static str, String)>,
    pub seed: Option<u64>,
    pub threads: String,
}

impl RunHeader {
    pub fn new(command: &'static str, threads: String) -> Self {
        RunHeader {
            command,
            config: Vec::new(),
            seed: None,
            threads,
        }
    }

    pub fn set(&mut self, key: &'static str, value: impl ToString) {
        self.config.push((key, value.to_string()));
    }

    fn csv_lines(&self) -> String {
        let mut s = format!(
            "# schema_version={SCHEMA_VERSION}\n# command={}\n",
            self.command
        );
        for (k, v) in &self.config {
            let _ = writeln!(s, "# {k}={v}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "# seed={seed}");
        }
        let _ = writeln!(s, "# threads={}", self.threads);
        s
    }

    /// JSON object holding `schema_version`, the header fields and `body`'s entries.
    pub fn wrap(&self, body: Value) -> Value {
        let mut config = Map::new();
        for (k, v) in &self.config {
            config.insert((*k).to_string(), Value::String(v.clone()));
        }
        let mut out = Map::new();
        out.insert("schema_version".into(), json!(SCHEMA_VERSION));
        out.insert("command".into(), json!(self.command));
        out.insert("config".into(), Value::Object(config));
        if let Some(seed) = self.seed {
            out.insert("seed".into(), json!(seed));
        }
        out.insert("threads".into(), json!(self.threads));
        if let Value::Object(fields) = body {
            out.extend(fields);
        }
        Value::Object(out)
    }
}

pub fn csv_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Six significant digits for terminal tables.
pub fn human(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor();
    if (-3.0..6.0).contains(&mag) {
        format!("{x:.*}", (5.0 - mag) as usize)
    } else {
        format!("{x:.5e}")
    }
}

pub fn spectrum_csv(header: &RunHeader, curve: &SpectralCurve) -> String {
    let mut s = header.csv_lines();
    match &curve.stderr {
        Some(se) => {
            s.push_str("omega,s_over_r,stderr\n");
            for ((w, v), e) in curve.omega.iter().zip(&curve.values).zip(se) {
                let _ = writeln!(
                    s,
                    "{},{},{}",
                    csv_number(*w),
                    csv_number(*v),
                    csv_number(*e)
                );
            }
        }
        None => {
            s.push_str("omega,s_over_r\n");
            for (w, v) in curve.omega.iter().zip(&curve.values) {
                let _ = writeln!(s, "{},{}", csv_number(*w), csv_number(*v));
            }
        }
    }
    s
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    write_text(dir, name, &text)
}

/// `{"value": x, "unit": u}` for SI fields.
pub fn with_unit(value: f64, unit: &str) -> Value {
    json!({ "value": value, "unit": unit })
}
