//! Writing result files and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands::{run_command, Report};
use crate::config::ExperimentConfig;
use crate::RunError;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Written next to partial output when a run fails.
pub const PARTIAL_MARKER: &str = "PARTIAL";

pub const SEED_RULE: &str = "each replica draws from a ChaCha8 stream seeded with its replica_seed, \
a splitmix64 hash of (seed, replica index, role tag); streams a replica needs beyond its first are \
seeded from a hash of its replica_seed, so every row can be re-simulated alone";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub workers: usize,
    pub seed_rule: String,
    pub started_at: String,
    pub finished_at: String,
    /// SHA-256 of each output file, keyed by path relative to the output
    /// directory. Timestamps live only in the manifest, which is not listed.
    pub checksums: BTreeMap<String, String>,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Renders the results table as CSV.
pub fn render_csv(report: &Report) -> Result<Vec<u8>, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| RunError::Io(e.to_string());
    w.write_record(&report.header).map_err(io)?;
    for row in &report.rows {
        w.write_record(row).map_err(io)?;
    }
    w.into_inner().map_err(|e| RunError::Io(e.to_string()))
}

fn render_jsonl<T: Serialize>(items: &[T]) -> Result<Vec<u8>, RunError> {
    let mut out = Vec::new();
    for it in items {
        serde_json::to_writer(&mut out, it).map_err(|e| RunError::Io(e.to_string()))?;
        out.push(b'\n');
    }
    Ok(out)
}

/// The files of a report, keyed by relative path.
pub fn render(report: &Report) -> Result<BTreeMap<String, Vec<u8>>, RunError> {
    let mut files = BTreeMap::new();
    files.insert("results.csv".to_string(), render_csv(report)?);
    files.insert("estimates.jsonl".to_string(), render_jsonl(&report.estimates)?);
    if !report.couplings.is_empty() {
        files.insert("couplings.jsonl".to_string(), render_jsonl(&report.couplings)?);
    }
    for (name, bytes) in &report.files {
        files.insert(name.clone(), bytes.clone());
    }
    Ok(files)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), RunError> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::File::create(&path)?.write_all(bytes)?;
    Ok(())
}

/// Runs the configured command on a pool of `config.workers` threads and
/// writes the result files plus `manifest.json` into `config.out_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunManifest, RunError> {
    let started_at = now();
    let workers = config.workers.resolve();
    let dir = config.out_dir.as_path();
    fs::create_dir_all(dir)?;
    let _ = fs::remove_file(dir.join(PARTIAL_MARKER));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Invalid(format!("cannot start {workers} workers: {e}")))?;
    let result = pool.install(|| run_command(config)).and_then(|r| render(&r));
    let files = match result {
        Ok(files) => files,
        Err(e) => {
            write_file(dir, PARTIAL_MARKER, format!("{e}\n").as_bytes())?;
            return Err(e);
        }
    };
    let mut checksums = BTreeMap::new();
    for (name, bytes) in &files {
        write_file(dir, name, bytes)?;
        checksums.insert(name.clone(), sha256_hex(bytes));
    }
    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME").into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: config.command.map(|c| c.name().to_string()).unwrap_or_default(),
        config: config.clone(),
        workers,
        seed_rule: SEED_RULE.into(),
        started_at,
        finished_at: now(),
        checksums,
    };
    let text = serde_json::to_vec_pretty(&manifest).map_err(|e| RunError::Io(e.to_string()))?;
    write_file(dir, "manifest.json", &text)?;
    Ok(manifest)
}
