//! Run reports and their two renderings.

use std::collections::BTreeMap;
use std::io::{self, Write};

use orthoalg_core::Tolerances;
use serde::Serialize;
use serde_json::Value;

use crate::input::Loaded;

#[derive(Debug, Clone, Serialize)]
pub struct InputRecord {
    pub path: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub sha256: String,
}

impl From<&Loaded> for InputRecord {
    fn from(l: &Loaded) -> Self {
        Self {
            path: l.path.clone(),
            name: l.file.name.clone(),
            sha256: l.sha256.clone(),
        }
    }
}

/// Everything a run produced. Apart from `wall_time_ms` the serialized form
/// depends only on the inputs, the flags and the seed.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<InputRecord>,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub verdicts: BTreeMap<String, bool>,
    pub residuals: BTreeMap<String, f64>,
    pub details: Value,
    pub counterexamples: Vec<String>,
    pub exit_code: i32,
    pub wall_time_ms: u64,
}

impl RunReport {
    pub fn new(command: &str, tolerances: Tolerances) -> Self {
        Self {
            command: command.to_string(),
            inputs: Vec::new(),
            seed: None,
            tolerances,
            verdicts: BTreeMap::new(),
            residuals: BTreeMap::new(),
            details: Value::Null,
            counterexamples: Vec::new(),
            exit_code: 0,
            wall_time_ms: 0,
        }
    }

    pub fn verdict(&mut self, key: &str, v: bool) {
        self.verdicts.insert(key.to_string(), v);
    }

    pub fn residual(&mut self, key: &str, v: f64) {
        self.residuals.insert(key.to_string(), v);
    }
}

/// A report plus the command-specific body for each format.
pub struct Outcome {
    pub report: RunReport,
    /// Human-readable body lines.
    pub text: Vec<String>,
    /// Extra JSON lines emitted before the report line.
    pub records: Vec<Value>,
}

impl Outcome {
    pub fn new(report: RunReport) -> Self {
        Self {
            report,
            text: Vec::new(),
            records: Vec::new(),
        }
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.text.push(s.into());
    }

    pub fn record(&mut self, kind: &str, body: impl Serialize) {
        let mut v = serde_json::to_value(body).unwrap_or(Value::Null);
        if let Value::Object(map) = &mut v {
            map.insert("record".into(), Value::String(kind.into()));
        } else {
            v = serde_json::json!({ "record": kind, "value": v });
        }
        self.records.push(v);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Jsonl,
}

fn fmt_residual(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.3e}")
    } else {
        x.to_string()
    }
}

pub fn emit(out: &Outcome, format: Format) -> io::Result<()> {
    let stdout = io::stdout();
    let mut w = stdout.lock();
    match format {
        Format::Jsonl => {
            for r in &out.records {
                writeln!(w, "{}", serde_json::to_string(r)?)?;
            }
            let mut report = serde_json::to_value(&out.report)?;
            if let Value::Object(map) = &mut report {
                map.insert("record".into(), Value::String("report".into()));
            }
            writeln!(w, "{}", serde_json::to_string(&report)?)?;
        }
        Format::Text => {
            let r = &out.report;
            writeln!(w, "{}", r.command)?;
            for i in &r.inputs {
                writeln!(w, "  input {} sha256:{}", i.path, &i.sha256[..16.min(i.sha256.len())])?;
            }
            if let Some(seed) = r.seed {
                writeln!(w, "  seed {seed}")?;
            }
            let t = &r.tolerances;
            writeln!(
                w,
                "  tolerances cluster_rel={:e} zero_abs={:e} proj_tol={:e} hermitian_tol={:e}",
                t.cluster_rel, t.zero_abs, t.proj_tol, t.hermitian_tol
            )?;
            for line in &out.text {
                writeln!(w, "{line}")?;
            }
            if !r.residuals.is_empty() {
                writeln!(w, "residuals:")?;
                for (k, v) in &r.residuals {
                    writeln!(w, "  {k:<28} {}", fmt_residual(*v))?;
                }
            }
            if !r.verdicts.is_empty() {
                writeln!(w, "verdicts:")?;
                for (k, v) in &r.verdicts {
                    writeln!(w, "  {k:<28} {v}")?;
                }
            }
            for c in &r.counterexamples {
                writeln!(w, "counterexample written to {c}")?;
            }
            writeln!(w, "exit {} ({} ms)", r.exit_code, r.wall_time_ms)?;
        }
    }
    w.flush()
}
