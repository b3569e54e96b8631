//! CSV tables, JSON reports and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use serde::Serialize;

use crate::config::{ExperimentConfig, RuleName};
use crate::error::{Result, SimError};
use crate::harness::DistortionPoint;

pub const DISTORTION_SCHEMA: &str = "ceo.distortion.v1";
pub const SCALING_SCHEMA: &str = "ceo.scaling.v1";
pub const EQUIVALENCE_SCHEMA: &str = "ceo.equivalence.v1";
pub const BOUNDS_SCHEMA: &str = "ceo.bounds.v1";
pub const MANIFEST_SCHEMA: &str = "ceo.manifest.v1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionRow {
    #[serde(rename = "L")]
    pub agents: usize,
    #[serde(rename = "R_sum_nats")]
    pub r_sum_nats: f64,
    pub r: f64,
    pub estimator: &'static str,
    #[serde(rename = "D_hat")]
    pub d_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
}

impl DistortionRow {
    pub fn new(p: &DistortionPoint, r: f64, rule: RuleName, seed: u64) -> Self {
        Self {
            agents: p.agents,
            r_sum_nats: p.r_sum,
            r,
            estimator: rule.label(),
            d_hat: p.d_hat.mean,
            ci_lo: p.d_hat.lo,
            ci_hi: p.d_hat.hi,
            seed,
        }
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| SimError::config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| SimError::io(path, e))
}

fn timestamp(t: SystemTime) -> String {
    humantime::format_rfc3339_seconds(t).to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<String>,
}

/// Output directory that remembers what was written to it.
#[derive(Debug)]
pub struct RunOutput {
    dir: PathBuf,
    command: String,
    config_hash: String,
    seed: u64,
    started: SystemTime,
    outputs: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl RunOutput {
    pub fn create(dir: &Path, command: &str, config: &ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.to_owned(),
            config_hash: config.hash.clone(),
            seed: config.seed,
            started: SystemTime::now(),
            outputs: Vec::new(),
        })
    }

    fn claim(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_owned());
        self.dir.join(name)
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<PathBuf> {
        let path = self.claim(name);
        write_csv(&path, rows)?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.claim(name);
        write_json(&path, value)?;
        Ok(path)
    }

    /// Writes `manifest.json`, listing itself among the outputs.
    pub fn finish(mut self) -> Result<RunManifest> {
        let path = self.claim(MANIFEST_FILE);
        let manifest = RunManifest {
            schema: MANIFEST_SCHEMA,
            tool_version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config_hash: self.config_hash,
            seed: self.seed,
            started_at: timestamp(self.started),
            finished_at: timestamp(SystemTime::now()),
            outputs: self.outputs,
        };
        write_json(&path, &manifest)?;
        Ok(manifest)
    }
}
