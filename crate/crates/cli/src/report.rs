//! The machine-readable report and its human summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Map, Value};
use sheafdg::homology::{format_presentation, DegreeReport};
use sheafdg::{CohomologyReport, ModulePresentation, Window};

#[derive(Clone, Debug)]
pub struct Entry {
    pub rank: usize,
    pub presentation: String,
}

impl From<&DegreeReport> for Entry {
    fn from(d: &DegreeReport) -> Self {
        Entry {
            rank: d.rank(),
            presentation: d.presentation(),
        }
    }
}

impl From<&ModulePresentation> for Entry {
    fn from(m: &ModulePresentation) -> Self {
        Entry {
            rank: m.ngens,
            presentation: format_presentation(m),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub window: Option<Window>,
    pub q_max: Option<usize>,
    pub per_point: BTreeMap<String, BTreeMap<i32, Entry>>,
    pub checks: BTreeMap<String, bool>,
    pub details: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str, window: Option<Window>, q_max: Option<usize>) -> Self {
        Report {
            command: command.to_string(),
            window,
            q_max,
            per_point: BTreeMap::new(),
            checks: BTreeMap::new(),
            details: Map::new(),
        }
    }

    pub fn cohomology(&mut self, r: &CohomologyReport) {
        for (pt, degs) in &r.per_point {
            let slot = self.per_point.entry(pt.clone()).or_default();
            for (n, d) in degs {
                slot.insert(*n, d.into());
            }
        }
    }

    pub fn check(&mut self, name: &str, pass: bool) {
        self.checks.insert(name.to_string(), pass);
    }

    pub fn detail(&mut self, key: &str, value: Value) {
        self.details.insert(key.to_string(), value);
    }

    /// Keys come out sorted: `serde_json::Map` is ordered.
    pub fn to_json(&self) -> Value {
        let per_point: Map<String, Value> = self
            .per_point
            .iter()
            .map(|(pt, degs)| {
                let degs: Map<String, Value> = degs
                    .iter()
                    .map(|(n, e)| (n.to_string(), json!({"rank": e.rank, "presentation": e.presentation})))
                    .collect();
                (pt.clone(), Value::Object(degs))
            })
            .collect();
        let checks: Map<String, Value> = self
            .checks
            .iter()
            .map(|(k, &v)| (k.clone(), Value::from(if v { "pass" } else { "fail" })))
            .collect();
        json!({
            "command": self.command,
            "window": self.window.map(|w| format!("{}:{}", w.min, w.max)),
            "q_max": self.q_max,
            "per_point": per_point,
            "checks": checks,
            "details": self.details,
        })
    }

    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{}", self.command);
        if let Some(w) = self.window {
            let _ = write!(out, "  window [{}, {}]", w.min, w.max);
        }
        if let Some(q) = self.q_max {
            let _ = write!(out, "  q_max {q}");
        }
        if self.details.get("experimental") == Some(&Value::Bool(true)) {
            out.push_str("  (experimental)");
        }
        out.push('\n');
        for (pt, degs) in &self.per_point {
            let _ = writeln!(out, "  point {pt}");
            for (n, e) in degs.iter().rev() {
                let _ = writeln!(out, "    H^{n:<3} rank {:<3} {}", e.rank, e.presentation);
            }
        }
        if let Some(Value::Array(rows)) = self.details.get("certificate") {
            let _ = writeln!(out, "  certificate");
            for r in rows {
                let _ = writeln!(
                    out,
                    "    {:<6} {:>3}  {:<16} {}",
                    r["point"].as_str().unwrap_or(""),
                    r["degree"].as_i64().unwrap_or(0),
                    r["condition"].as_str().unwrap_or(""),
                    if r["pass"] == Value::Bool(true) { "pass" } else { "fail" }
                );
            }
        }
        if let Some(Value::Array(diags)) = self.details.get("diagnostics") {
            for d in diags {
                let _ = writeln!(out, "  ! {}", d.as_str().unwrap_or(""));
            }
        }
        for (name, pass) in &self.checks {
            let _ = writeln!(out, "  {name}: {}", if *pass { "pass" } else { "fail" });
        }
        out
    }
}
