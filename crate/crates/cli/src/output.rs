use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::pipeline::{json_bytes, Outcome};
use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub experiment: &'a str,
    pub config: &'a ExperimentConfig,
    pub library_version: &'static str,
    pub cli_version: &'static str,
    pub started_at: String,
    pub finished_at: String,
    pub total_seconds: f64,
    pub timings: Vec<Timing>,
    pub outputs: Vec<FileEntry>,
    pub warnings: &'a [String],
    pub status: &'static str,
}

fn stamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Writes every artifact into `dir` followed by `manifest.json`.
pub fn write_run(
    dir: &Path,
    cfg: &ExperimentConfig,
    outcome: &Outcome,
    started: DateTime<Utc>,
) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let mut outputs = Vec::with_capacity(outcome.artifacts.len());
    for a in &outcome.artifacts {
        fs::write(dir.join(&a.name), &a.bytes)?;
        outputs.push(FileEntry { path: a.name.clone(), bytes: a.bytes.len(), sha256: hex::encode(Sha256::digest(&a.bytes)) });
    }
    let finished = Utc::now();
    let manifest = Manifest {
        experiment: &cfg.experiment,
        config: cfg,
        library_version: dirseq_core::VERSION,
        cli_version: env!("CARGO_PKG_VERSION"),
        started_at: stamp(started),
        finished_at: stamp(finished),
        total_seconds: (finished - started).num_microseconds().unwrap_or(0) as f64 / 1e6,
        timings: outcome.timings.iter().map(|(s, t)| Timing { stage: s.clone(), seconds: *t }).collect(),
        outputs,
        warnings: &outcome.warnings,
        status: if outcome.failure.is_some() { "failed" } else { "ok" },
    };
    fs::write(dir.join("manifest.json"), json_bytes(&manifest)?)?;
    Ok(())
}
