use std::collections::BTreeMap;

use serde::Serialize;

/// Outcome of one command: its inputs and every individual check.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<CheckRecord>,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub data: BTreeMap<String, serde_json::Value>,
    /// Nonzero terms of `lhs - rhs` when a Grassmann identity fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub difference: Option<Vec<(Vec<String>, String)>>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, pass: bool) -> Self {
        Self { name: name.into(), pass, data: BTreeMap::new(), difference: None }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.data.insert(key.into(), serde_json::to_value(value).expect("plain data"));
        self
    }
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self { command: command.into(), inputs: BTreeMap::new(), checks: Vec::new(), passed: true }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) {
        self.inputs.insert(key.into(), serde_json::to_value(value).expect("plain data"));
    }

    pub fn push(&mut self, check: CheckRecord) {
        self.passed &= check.pass;
        self.checks.push(check);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}
