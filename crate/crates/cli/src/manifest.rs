//! Figure-reproduction manifests: a scenario, seed, overrides and an optional
//! sweep, plus expected bands checked against the sweep table.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Classify, CmdResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: String,
    #[serde(default)]
    pub description: String,
    /// Relative paths resolve against the manifest's directory.
    pub scenario: PathBuf,
    pub seed: u64,
    #[serde(default)]
    pub set: Vec<String>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub expect: Vec<Expectation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub key: String,
    pub values: Vec<serde_json::Value>,
    #[serde(default)]
    pub metrics: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Increasing,
    Decreasing,
    NonDecreasing,
}

/// A band on one column of the sweep table. Bounds apply to every row; the
/// trend applies across rows in sweep order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub column: String,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub trend: Option<Trend>,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpectationResult {
    pub column: String,
    pub pass: bool,
    pub detail: String,
}

impl RunManifest {
    pub fn load(path: &Path) -> CmdResult<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read manifest {}", path.display()))
            .validation()?;
        let m: RunManifest = serde_json::from_str(&text)
            .with_context(|| format!("malformed manifest {}", path.display()))
            .validation()?;
        let base = path.parent().unwrap_or(Path::new("."));
        let scenario = if m.scenario.is_absolute() { m.scenario.clone() } else { base.join(&m.scenario) };
        Ok((m, scenario))
    }

    pub fn require_command(&self, name: &str) -> CmdResult<()> {
        if self.command == name {
            Ok(())
        } else {
            Err(invalid(format!("manifest is for `{}`, not `{name}`", self.command)))
        }
    }
}

/// Raw text of a sweep value as given to a `--set` override.
pub fn value_text(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn check(expect: &Expectation, column: &[Option<f64>]) -> ExpectationResult {
    let mut problems = Vec::new();
    let values: Vec<f64> = column.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        problems.push("missing values".to_string());
    }
    if let Some(lo) = expect.min {
        if values.iter().any(|v| *v < lo) {
            problems.push(format!("below {lo}"));
        }
    }
    if let Some(hi) = expect.max {
        if values.iter().any(|v| *v > hi) {
            problems.push(format!("above {hi}"));
        }
    }
    if let Some(trend) = expect.trend {
        let ok = values.windows(2).all(|w| match trend {
            Trend::Increasing => w[1] > w[0],
            Trend::Decreasing => w[1] < w[0],
            Trend::NonDecreasing => w[1] >= w[0],
        });
        if !ok {
            problems.push(format!("not {trend:?}").to_lowercase());
        }
    }
    let shown: Vec<String> = values.iter().map(|v| format!("{v:.4e}")).collect();
    let detail = if problems.is_empty() {
        format!("[{}]", shown.join(", "))
    } else {
        format!("[{}]: {}", shown.join(", "), problems.join("; "))
    };
    ExpectationResult { column: expect.column.clone(), pass: problems.is_empty(), detail }
}
