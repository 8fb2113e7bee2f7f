//! Run manifests and report writing.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use reid_temporal::report::{digest_json, sha256_hex};
use serde_json::{json, Map, Value};

use crate::error::{io_error, CliError};

pub const TOOL_VERSION: &str = concat!("reid-temporal ", env!("CARGO_PKG_VERSION"));

/// Collects everything a run depends on. The digest covers only fields that
/// determine the results, so it is stable across output directories, thread
/// counts and timing.
pub struct Run {
    subcommand: &'static str,
    output_dir: PathBuf,
    config: Value,
    inputs: Map<String, Value>,
    seed: Option<u64>,
    threads: Option<usize>,
    started: Instant,
    outputs: Vec<String>,
}

impl Run {
    pub fn new(subcommand: &'static str, output_dir: &Path, threads: Option<usize>) -> Result<Self, CliError> {
        fs::create_dir_all(output_dir).map_err(|e| io_error(output_dir, e))?;
        Ok(Run {
            subcommand,
            output_dir: output_dir.to_path_buf(),
            config: Value::Null,
            inputs: Map::new(),
            seed: None,
            threads,
            started: Instant::now(),
            outputs: Vec::new(),
        })
    }

    pub fn set_config(&mut self, config: Value) {
        self.config = config;
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    /// Records an input file under `role`. A missing file is reported with
    /// `missing_code`.
    pub fn input(&mut self, role: &str, path: &Path, missing_code: &str) -> Result<(), CliError> {
        let bytes = fs::read(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::new(missing_code, format!("{} not found", path.display())),
            _ => io_error(path, e),
        })?;
        self.inputs.insert(
            role.to_string(),
            json!({ "path": path.display().to_string(), "sha256": sha256_hex(&bytes) }),
        );
        Ok(())
    }

    pub fn digest(&self) -> String {
        let inputs: Map<String, Value> = self
            .inputs
            .iter()
            .map(|(k, v)| (k.clone(), v["sha256"].clone()))
            .collect();
        digest_json(&json!({
            "subcommand": self.subcommand,
            "config": self.config,
            "inputs": inputs,
            "seed": self.seed,
            "tool_version": TOOL_VERSION,
        }))
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.output_dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| io_error(&path, e))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    /// Records a file written by library code.
    pub fn note_output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    pub fn output_dir(&self) -> &Path {
        &self.output_dir
    }

    /// Writes a JSON report with the run digest attached.
    pub fn write_json_report(&mut self, name: &str, mut report: Value) -> Result<(), CliError> {
        if let Value::Object(map) = &mut report {
            map.insert("run_manifest_digest".into(), Value::String(self.digest()));
        }
        let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        self.write(name, &text)
    }

    /// Writes a CSV report with a trailing `run_manifest_digest` column.
    pub fn write_csv_report(&mut self, name: &str, csv: &str) -> Result<(), CliError> {
        let digest = self.digest();
        let mut out = String::with_capacity(csv.len() + 80);
        for (i, line) in csv.lines().enumerate() {
            out.push_str(line);
            out.push(',');
            out.push_str(if i == 0 { "run_manifest_digest" } else { &digest });
            out.push('\n');
        }
        self.write(name, &out)
    }

    /// Writes `run_manifest.json`; the only output that varies between
    /// otherwise identical runs.
    pub fn finish(mut self) -> Result<(), CliError> {
        let manifest = json!({
            "subcommand": self.subcommand,
            "config": self.config,
            "inputs": self.inputs,
            "seed": self.seed,
            "tool_version": TOOL_VERSION,
            "threads": self.threads,
            "outputs": self.outputs,
            "duration_sec": self.started.elapsed().as_secs_f64(),
            "digest": self.digest(),
        });
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        self.write("run_manifest.json", &text)
    }
}
