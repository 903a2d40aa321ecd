//! Report assembly. `report.json` is a pure function of the resolved config
//! and the computation; wall time goes to `timing.json` so identical runs
//! produce byte-identical reports.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

/// Pipeline result: machine-readable payload plus named checks.
#[derive(Debug, Default)]
pub struct Outcome {
    pub result: Value,
    pub assertions: Vec<Assertion>,
}

impl Outcome {
    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion::new(name, pass, detail));
    }

    pub fn pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }
}

/// Hex SHA-256 of the compact JSON echo (keys sorted).
pub fn config_hash(echo: &Value) -> String {
    let bytes = serde_json::to_vec(echo).expect("json values serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

pub fn render(pipeline: &str, echo: &Value, outcome: &Outcome) -> Value {
    let failures: Vec<&str> = outcome.assertions.iter().filter(|a| !a.pass).map(|a| a.name.as_str()).collect();
    json!({
        "tool": "solerlab",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": solerlab::VERSION,
        "pipeline": pipeline,
        "config_hash": config_hash(echo),
        "config": echo,
        "pass": outcome.pass(),
        "failures": failures,
        "assertions": outcome.assertions,
        "result": outcome.result,
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
