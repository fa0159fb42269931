//! Run records: the resolved config, results, version and timestamps, with
//! a digest over the parts that a replay must reproduce.

use std::time::{SystemTime, UNIX_EPOCH};

use ns_lab_core::digest::json_digest;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: String,
    pub config: ExperimentConfig,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub results: Value,
    /// SHA-256 of `{config, results}`.
    pub digest: String,
}

#[derive(Serialize)]
struct Digested<'a> {
    config: &'a ExperimentConfig,
    results: &'a Value,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

impl RunRecord {
    pub fn new(config: ExperimentConfig, results: Value, started_unix_ms: u128) -> Result<Self, CliError> {
        let digest = json_digest(&Digested { config: &config, results: &results })?;
        Ok(Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            started_unix_ms,
            finished_unix_ms: now_ms(),
            results,
            digest,
        })
    }

    /// True when the stored digest matches the stored config and results.
    pub fn verify(&self) -> bool {
        json_digest(&Digested { config: &self.config, results: &self.results }).is_ok_and(|d| d == self.digest)
    }
}
