//! Pass/fail reports with structured witnesses.

use std::fmt;

use serde::{Deserialize, Serialize};

/// One failed check, with the events, states and numbers that witness it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
}

impl Violation {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            events: Vec::new(),
            states: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn events(mut self, events: impl IntoIterator<Item = String>) -> Self {
        self.events.extend(events);
        self
    }

    pub fn states(mut self, states: impl IntoIterator<Item = String>) -> Self {
        self.states.extend(states);
        self
    }

    pub fn values(mut self, values: impl IntoIterator<Item = f64>) -> Self {
        self.values.extend(values);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub axiom: String,
    pub passed: bool,
    pub violations: Vec<Violation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl AuditReport {
    pub fn new(axiom: impl Into<String>, violations: Vec<Violation>) -> Self {
        Self {
            axiom: axiom.into(),
            passed: violations.is_empty(),
            violations,
            notes: Vec::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        writeln!(f, "{}: {status} ({} violations)", self.axiom, self.violations.len())?;
        for v in &self.violations {
            write!(f, "  - {}", v.message)?;
            if !v.events.is_empty() {
                write!(f, " events={}", v.events.join(" "))?;
            }
            if !v.states.is_empty() {
                write!(f, " states={}", v.states.join(" "))?;
            }
            if !v.values.is_empty() {
                let vals: Vec<String> = v.values.iter().map(|x| format!("{x:.6}")).collect();
                write!(f, " values={}", vals.join(" "))?;
            }
            writeln!(f)?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}
