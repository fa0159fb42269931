//! Experiment configuration: a flat set of optional parameters read from a
//! JSON file or a previous run record, overridden by command-line flags,
//! and filled with per-command defaults before a run.

use std::path::{Path, PathBuf};

use ns_lab_core::partition::{simplex_with_volumes, FlatPartition, Partition, StandardSimplexSpec};
use ns_lab_core::partition::make_standard_simplex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::record::RunRecord;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum Command {
    Stability,
    Limits,
    Improve,
    Plurality,
    Bilinear,
    Volumes,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Dimension for Gaussian commands, number of voters for `plurality`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volumes: Option<[f64; 3]>,
    /// A partition document, or a path to one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub improve_samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub challengers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_volumes: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_volumes: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl ExperimentConfig {
    /// Reads a config file. A run record is accepted too, in which case its
    /// embedded config is used.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let bad = |e: serde_json::Error| CliError::Config(format!("{}: {e}", path.display()));
        match value {
            Value::Object(ref m) if m.contains_key("config") && m.contains_key("results") => {
                let record: RunRecord = serde_json::from_value(value).map_err(bad)?;
                if !record.verify() {
                    return Err(CliError::Config(format!("{}: record digest does not match its contents", path.display())));
                }
                Ok(record.config)
            }
            v => serde_json::from_value(v).map_err(bad),
        }
    }

    /// Sets `field` to `default` when absent and returns the value.
    pub fn get_or<T: Clone>(field: &mut Option<T>, default: T) -> T {
        field.get_or_insert(default).clone()
    }

    /// The configured partition, if any, reading files on demand. A file
    /// reference is replaced by the document so the record is self-contained.
    pub fn take_partition(&mut self) -> Result<Option<Partition>, CliError> {
        let Some(v) = self.partition.clone() else { return Ok(None) };
        let doc = match v {
            Value::String(path) => {
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
                serde_json::from_str::<Value>(&text).map_err(|e| CliError::Config(format!("{path}: {e}")))?
            }
            other => other,
        };
        let p: Partition =
            serde_json::from_value(doc.clone()).map_err(|e| CliError::Config(format!("partition: {e}")))?;
        self.partition = Some(doc);
        Ok(Some(p))
    }

    /// The partition for Gaussian commands: an explicit document, else a
    /// planar simplex with target volumes, else a simplex with the given
    /// shift, else the centered simplex in dimension `n` (default 2).
    pub fn gaussian_partition(&mut self) -> Result<Partition, CliError> {
        if let Some(p) = self.take_partition()? {
            return Ok(p);
        }
        Ok(self.flat_partition()?.into())
    }

    pub fn flat_partition(&mut self) -> Result<FlatPartition, CliError> {
        if let Some(p) = self.take_partition()? {
            return match p {
                Partition::Flat(f) => Ok(f),
                _ => Err(CliError::Config("this command needs a flat partition".into())),
            };
        }
        if let Some(v) = self.volumes {
            return Ok(simplex_with_volumes(v)?);
        }
        let shift = match &self.shift {
            Some(s) => s.clone(),
            None => vec![0.0; Self::get_or(&mut self.n, 2) as usize],
        };
        self.n = Some(shift.len() as u64);
        self.shift = Some(shift.clone());
        Ok(make_standard_simplex(&StandardSimplexSpec { n: shift.len(), shift })?)
    }
}
