//! Verdicts returned by the condition checkers.

use serde::Serialize;

/// An event in a witness, listed extensionally.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventWitness {
    pub label: String,
    pub histories: Vec<String>,
}

/// Counterexample attached to a failing report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct Witness {
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EventWitness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub valuations: Vec<String>,
}

/// Verdict for one scope (a region, a region pair, ...) of a condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubResult {
    pub scope: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub condition: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub detail: Vec<SubResult>,
}

impl ConditionReport {
    pub fn pass(condition: impl Into<String>) -> Self {
        ConditionReport { condition: condition.into(), holds: true, witness: None, detail: Vec::new() }
    }

    pub fn fail(condition: impl Into<String>, witness: Witness) -> Self {
        ConditionReport { condition: condition.into(), holds: false, witness: Some(witness), detail: Vec::new() }
    }

    pub fn with_detail(mut self, detail: Vec<SubResult>) -> Self {
        self.detail = detail;
        self
    }
}
