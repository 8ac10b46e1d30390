//! `manifest.json`: provenance of one CLI invocation.

use super::{io_context, Result};
use crate::diagnostics::DiagnosticRecord;
use serde::Serialize;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub code_version: String,
    pub start_unix_seconds: f64,
    pub end_unix_seconds: f64,
    pub steps: u64,
    pub flooring_total: u64,
    pub final_record: Option<DiagnosticRecord>,
    pub files: Vec<String>,
    /// `ok` or `failed`.
    pub status: String,
    pub failure: Option<String>,
}

pub fn unix_seconds() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

impl RunManifest {
    pub fn start(command: &str, config_hash: String) -> Self {
        Self {
            command: command.to_string(),
            config_hash,
            code_version: CODE_VERSION.to_string(),
            start_unix_seconds: unix_seconds(),
            end_unix_seconds: f64::NAN,
            steps: 0,
            flooring_total: 0,
            final_record: None,
            files: Vec::new(),
            status: "running".into(),
            failure: None,
        }
    }

    pub fn finish(&mut self, failure: Option<String>) {
        self.end_unix_seconds = unix_seconds();
        self.status = if failure.is_some() { "failed" } else { "ok" }.into();
        self.failure = failure;
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        io_context(std::fs::write(&path, text + "\n"), || format!("writing {}", path.display()))
    }
}
