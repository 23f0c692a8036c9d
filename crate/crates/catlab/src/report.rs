use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Bumped whenever a report field changes meaning.
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioRef {
    pub path: String,
    pub name: String,
    pub sha256: String,
}

impl ScenarioRef {
    pub fn new(path: &str, name: &str, bytes: &[u8]) -> Self {
        let digest = Sha256::digest(bytes);
        let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        ScenarioRef { path: path.into(), name: name.into(), sha256 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub report_version: u32,
    pub command: Vec<String>,
    pub seed: u64,
    pub scenario: ScenarioRef,
    pub result: serde_json::Value,
    /// Only present when asked for; it would break byte-identical reruns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl RunReport {
    pub fn to_json(&self) -> CliResult<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Output(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

/// One CSV line: an outcome with its exact probability and, for sampled
/// runs, the observed frequency over `n` draws.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub source: Option<String>,
    pub label: String,
    pub exact_p: f64,
    pub empirical_freq: Option<f64>,
    pub n: Option<u64>,
}

impl CsvRow {
    pub fn exact(label: impl Into<String>, exact_p: f64) -> Self {
        CsvRow { source: None, label: label.into(), exact_p, empirical_freq: None, n: None }
    }
}

pub fn to_csv(rows: &[CsvRow]) -> CliResult<String> {
    let with_source = rows.iter().any(|r| r.source.is_some());
    let mut w = csv::Writer::from_writer(Vec::new());
    let out = |e: csv::Error| CliError::Output(e.to_string());
    let mut header = vec!["label", "exact_p", "empirical_freq", "n"];
    if with_source {
        header.insert(0, "source");
    }
    w.write_record(&header).map_err(out)?;
    for r in rows {
        let mut rec = vec![
            r.label.clone(),
            r.exact_p.to_string(),
            r.empirical_freq.map(|f| f.to_string()).unwrap_or_default(),
            r.n.map(|n| n.to_string()).unwrap_or_default(),
        ];
        if with_source {
            rec.insert(0, r.source.clone().unwrap_or_default());
        }
        w.write_record(&rec).map_err(out)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}
