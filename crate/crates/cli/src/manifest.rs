use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::{self, CliError};

/// Record of one run, written after every other output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Vec<PathBuf>,
    pub settings_overrides: Vec<String>,
    pub outputs: Vec<PathBuf>,
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub wall_clock_s: f64,
    pub status: String,
    pub convergence: serde_json::Value,
}

/// Collects output files while a command runs.
pub struct Run {
    started: Instant,
    out: PathBuf,
    pub manifest: RunManifest,
}

impl Run {
    pub fn new(command: &str, out: &Path, config: Option<&Path>, overrides: &[String]) -> Self {
        Run {
            started: Instant::now(),
            out: out.to_path_buf(),
            manifest: RunManifest {
                command: command.to_string(),
                config: config.map(Path::to_path_buf).into_iter().collect(),
                settings_overrides: overrides.to_vec(),
                outputs: Vec::new(),
                schema_version: cryolink::SCHEMA_VERSION,
                tool_version: env!("CARGO_PKG_VERSION"),
                wall_clock_s: 0.0,
                status: "ok".into(),
                convergence: serde_json::Value::Null,
            },
        }
    }

    /// Writes `name` into the output directory and records it.
    pub fn emit(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out).map_err(|source| CliError::File {
            path: self.out.clone(),
            source,
        })?;
        let path = self.out.join(name);
        error::write(&path, contents)?;
        self.manifest.outputs.push(path.clone());
        Ok(path)
    }

    pub fn finish(mut self, outcome: Result<(), CliError>) -> Result<(), CliError> {
        if let Err(e) = &outcome {
            self.manifest.status = format!("{}: {e}", e.kind());
            let diag = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            // keep the original failure if the diagnostics cannot be written either
            let _ = self.emit("diagnostics.json", &to_json(&diag));
        }
        self.manifest.wall_clock_s = self.started.elapsed().as_secs_f64();
        let text = to_json(&self.manifest);
        std::fs::create_dir_all(&self.out).map_err(|source| CliError::File {
            path: self.out.clone(),
            source,
        })?;
        error::write(&self.out.join("manifest.json"), &text)?;
        outcome
    }
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("in-memory serialization") + "\n"
}
