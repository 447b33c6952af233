//! The machine-readable run report and its text rendering.

use std::fmt::Write as _;

use locality_core::enumerate::OracleReport;
use locality_core::eprb::EprbReport;
use locality_core::report::ConditionReport;
use serde::Serialize;

pub const SCHEMA_ID: &str = "https://locality-lab.invalid/report.schema.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Error,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Error => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputIdentity {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionOutcome {
    pub condition: String,
    pub status: Status,
    /// Reported without affecting the verdict.
    pub informational: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ConditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Probabilistic {
    pub correlators: [String; 4],
    pub chsh: String,
    pub chsh_value: f64,
    pub local_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<InputIdentity>,
    pub tolerance: f64,
    pub conditions: Vec<ConditionOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probabilistic: Option<Probabilistic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eprb: Option<EprbReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    pub verdict: Verdict,
}

impl RunReport {
    pub fn new(command: &str, tolerance: f64) -> Self {
        RunReport {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            inputs: Vec::new(),
            tolerance,
            conditions: Vec::new(),
            probabilistic: None,
            eprb: None,
            oracle: None,
            verdict: Verdict::Pass,
        }
    }

    /// Error beats failure; informational conditions never count.
    pub fn settle(&mut self) {
        let counted = self.conditions.iter().filter(|c| !c.informational);
        self.verdict = counted.fold(Verdict::Pass, |v, c| match (v, c.status) {
            (Verdict::Error, _) | (_, Status::Error) => Verdict::Error,
            (Verdict::Fail, _) | (_, Status::Fail) => Verdict::Fail,
            _ => Verdict::Pass,
        });
        if let Some(o) = &self.oracle {
            if !o.passed && self.verdict == Verdict::Pass {
                self.verdict = Verdict::Fail;
            }
        }
        if let Some(e) = &self.eprb {
            if !e.as_expected && self.verdict == Verdict::Pass {
                self.verdict = Verdict::Fail;
            }
        }
    }

    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").insert("$schema".into(), SCHEMA_ID.into());
        serde_json::to_string_pretty(&v).expect("value serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.tool, self.version, self.command);
        for i in &self.inputs {
            let _ = writeln!(out, "input: {} (sha256 {})", i.path, i.sha256);
        }
        for c in &self.conditions {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Error => "ERROR",
            };
            let note = if c.informational { " (informational)" } else { "" };
            let _ = write!(out, "{}: {status}{note}", c.condition);
            if let Some(w) = c.report.as_ref().and_then(|r| r.witness.as_ref()) {
                let _ = write!(out, ": {}", w.message);
            }
            if let Some(e) = &c.error {
                let _ = write!(out, ": {e}");
            }
            out.push('\n');
        }
        if let Some(e) = &self.eprb {
            let _ = writeln!(out, "derivation: {}", e.derivation);
            let _ = writeln!(out, "closure: {}", e.closure);
            for item in &e.items {
                let mark = if item.holds == item.expected { "ok" } else { "UNEXPECTED" };
                let _ = writeln!(out, "  {}: holds={} expected={} {mark}", item.item, item.holds, item.expected);
            }
        }
        if let Some(p) = &self.probabilistic {
            let _ = writeln!(out, "correlators: {}", p.correlators.join(", "));
            let _ = writeln!(out, "chsh: {} ({})", p.chsh, p.chsh_value);
            let _ = writeln!(out, "local bound: {}", p.local_bound);
        }
        if let Some(o) = &self.oracle {
            let _ = writeln!(out, "suite: {}", o.suite);
            let _ = writeln!(
                out,
                "bounds: max_omega={} max_points={} seed={}",
                o.bounds.max_omega, o.bounds.max_points, o.bounds.seed
            );
            let _ = writeln!(out, "theories: {}", o.theories);
            let _ = writeln!(out, "agreements: {}", o.agreements);
            let _ = writeln!(out, "disagreements: {}", o.disagreements);
            for (k, v) in &o.stats {
                let _ = writeln!(out, "{k}: {v}");
            }
            if let Some(note) = &o.counterexample_note {
                let _ = writeln!(out, "counterexample: {note}");
            }
            if let Some(model) = &o.counterexample {
                out.push_str(model);
                if !model.ends_with('\n') {
                    out.push('\n');
                }
            }
        }
        let verdict = match self.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Error => "error",
        };
        let _ = writeln!(out, "verdict: {verdict}");
        out
    }
}
