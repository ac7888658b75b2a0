use std::path::Path;

use serde::Serialize;

use crate::Cli;

#[derive(Debug, Clone, Serialize)]
pub struct OutputDigest {
    /// File path, or `-` for stdout.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Record of one invocation, emitted exactly once per run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub seeds: Vec<u64>,
    pub version: String,
    pub wall_time_s: f64,
    pub threads: usize,
    pub exit_code: u8,
    pub outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn new(cli: &Cli) -> Self {
        let params = serde_json::to_value(cli).unwrap_or(serde_json::Value::Null);
        let command = params
            .get("command")
            .and_then(|c| c.get("command"))
            .and_then(|c| c.as_str())
            .unwrap_or("unknown")
            .to_string();
        RunManifest {
            command,
            params,
            seeds: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: 0.0,
            threads: 0,
            exit_code: 0,
            outputs: Vec::new(),
        }
    }

    /// Manifest for a command line that did not parse.
    pub fn unparsed(wall_time_s: f64, exit_code: u8) -> Self {
        RunManifest {
            command: "unknown".into(),
            params: serde_json::Value::Null,
            seeds: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s,
            threads: 0,
            exit_code,
            outputs: Vec::new(),
        }
    }

    /// Write to `path`, or to stderr as a single `manifest: {...}` line.
    pub fn emit(&self, path: Option<&Path>) -> std::io::Result<()> {
        let json = serde_json::to_string(self).map_err(std::io::Error::other)?;
        match path {
            Some(p) => std::fs::write(p, json + "\n"),
            None => {
                eprintln!("manifest: {json}");
                Ok(())
            }
        }
    }
}
