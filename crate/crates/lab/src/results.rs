//! Result records and their JSON form.

use std::path::{Path, PathBuf};

use erw_core::{Estimate, EstimateSummary};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Threshold, SCHEMA_VERSION};
use crate::error::{LabError, LabResult};

/// The published JSON schema for [`ResultSet`].
pub const RESULTS_SCHEMA: &str = include_str!("../schema/results.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointParams {
    pub d: usize,
    pub m: Threshold,
    pub beta: f64,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub observable: String,
    pub params: PointParams,
    pub count: u64,
    pub mean: f64,
    /// `null` when fewer than two units contributed.
    pub stderr: Option<f64>,
    pub method: String,
}

impl ResultRecord {
    pub fn from_estimate(e: &Estimate, params: PointParams) -> Self {
        ResultRecord {
            observable: e.label.clone(),
            params,
            count: e.count,
            mean: e.mean,
            stderr: e.stderr.is_finite().then_some(e.stderr),
            method: e.method.to_string(),
        }
    }

    pub fn from_summary(s: &EstimateSummary, params: PointParams, method: &'static str) -> Self {
        Self::from_estimate(&s.finish(method), params)
    }

    pub fn estimate(&self) -> Estimate {
        Estimate {
            label: self.observable.clone(),
            count: self.count,
            mean: self.mean,
            stderr: self.stderr.unwrap_or(f64::NAN),
            method: "",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub results: Vec<ResultRecord>,
}

impl ResultSet {
    pub fn new(config: ExperimentConfig) -> Self {
        ResultSet {
            schema_version: SCHEMA_VERSION,
            config,
            results: Vec::new(),
        }
    }

    /// First record for `observable` at `beta`.
    pub fn find(&self, observable: &str, beta: f64) -> Option<&ResultRecord> {
        self.results
            .iter()
            .find(|r| r.observable == observable && r.params.beta == beta)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize")
    }

    pub fn to_csv(&self) -> LabResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "observable",
            "d",
            "m",
            "beta",
            "n",
            "count",
            "mean",
            "stderr",
            "method",
        ])?;
        for r in &self.results {
            w.write_record([
                r.observable.clone(),
                r.params.d.to_string(),
                r.params.m.to_string(),
                r.params.beta.to_string(),
                r.params.n.to_string(),
                r.count.to_string(),
                r.mean.to_string(),
                r.stderr.map_or_else(String::new, |s| s.to_string()),
                r.method.clone(),
            ])?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| LabError::Failed(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Writes `results.json` and `config.json` into `dir`, which must exist.
    pub fn persist(&self, dir: &Path) -> LabResult<Vec<PathBuf>> {
        if !dir.is_dir() {
            return Err(LabError::io(
                dir,
                std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    "output directory does not exist",
                ),
            ));
        }
        let results = dir.join("results.json");
        let config = dir.join("config.json");
        std::fs::write(&results, self.to_json()).map_err(|e| LabError::io(&results, e))?;
        std::fs::write(&config, self.config.to_json()).map_err(|e| LabError::io(&config, e))?;
        Ok(vec![results, config])
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        let set: ResultSet =
            serde_json::from_str(&text).map_err(|e| LabError::Config(e.to_string()))?;
        if set.schema_version != SCHEMA_VERSION {
            return Err(LabError::SchemaVersion {
                found: set.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        Ok(set)
    }
}
