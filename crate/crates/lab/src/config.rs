//! Experiment configuration, read from and echoed to JSON.

use std::fmt;
use std::path::{Path, PathBuf};

use erw_core::walk::{Excitation, WalkKind, WalkParams};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LabError, LabResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Excitation threshold as written in configs: a positive integer or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    Finite(u32),
    Infinite,
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::Finite(1)
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Finite(m) => write!(f, "{m}"),
            Threshold::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Threshold {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" | "infinity" => Ok(Threshold::Infinite),
            _ => match s.parse::<u32>() {
                Ok(0) | Err(_) => Err(format!("expected a positive integer or \"inf\", got {s:?}")),
                Ok(m) => Ok(Threshold::Finite(m)),
            },
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Threshold::Finite(m) => s.serialize_u32(*m),
            Threshold::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(m) => u32::try_from(m)
                .ok()
                .filter(|&m| m > 0)
                .map(Threshold::Finite)
                .ok_or_else(|| de::Error::custom("m must be a positive integer or \"inf\"")),
            Raw::Text(s) => s.parse().map_err(de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    #[default]
    Erw,
    BiasedSrw,
    Symmetric,
}

/// Observables the harness can estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Finite-time speed, displacement and excitation forms.
    Speed,
    /// Finite-time score derivative.
    Derivative,
    SpeedRegenerative,
    DerivativeRegenerative,
    /// Paired central difference of regenerative speeds.
    DerivativeDifference,
    Range,
    Novelty,
    /// Windowed novelty rates, one per entry of `windows`.
    Truncated,
}

impl EstimatorKind {
    pub fn regenerative(self) -> bool {
        matches!(
            self,
            EstimatorKind::SpeedRegenerative
                | EstimatorKind::DerivativeRegenerative
                | EstimatorKind::DerivativeDifference
        )
    }
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_replicates() -> u64 {
    1
}

fn default_bootstrap() -> usize {
    erw_core::estimators::DEFAULT_RESAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    #[serde(default)]
    pub kind: Kind,
    pub d: usize,
    #[serde(default)]
    pub m: Threshold,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_grid: Option<Vec<f64>>,
    pub n: u64,
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub estimators: Vec<EstimatorKind>,
    /// Past length for the stationary walk; `None` uses the default rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burnin: Option<usize>,
    #[serde(default)]
    pub bit_exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    /// Half-width for `derivative_difference`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub windows: Vec<u64>,
    /// Renewal confirmation margin.
    #[serde(default)]
    pub margin: usize,
}

impl ExperimentConfig {
    pub fn new(d: usize, beta: f64, n: u64) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            kind: Kind::Erw,
            d,
            m: Threshold::Finite(1),
            beta: Some(beta),
            beta_grid: None,
            n,
            replicates: 1,
            seed: 0,
            estimators: vec![EstimatorKind::Speed],
            burnin: None,
            bit_exact: false,
            out_dir: None,
            workers: None,
            bootstrap: default_bootstrap(),
            h: None,
            windows: Vec::new(),
            margin: 0,
        }
    }

    pub fn from_json(text: &str) -> LabResult<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(LabError::SchemaVersion {
                found: cfg.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_json(&text)
    }

    /// The bias values to run, in order.
    pub fn betas(&self) -> LabResult<Vec<f64>> {
        match (&self.beta, &self.beta_grid) {
            (Some(_), Some(_)) => Err(LabError::Config(
                "give either beta or beta_grid, not both".into(),
            )),
            (Some(b), None) => Ok(vec![*b]),
            (None, Some(g)) if !g.is_empty() => Ok(g.clone()),
            (None, Some(_)) => Err(LabError::Config("beta_grid is empty".into())),
            (None, None) if self.kind == Kind::Symmetric => Ok(vec![0.0]),
            (None, None) => Err(LabError::Config("missing beta or beta_grid".into())),
        }
    }

    /// `m` as it applies to the walk kind.
    pub fn effective_m(&self) -> Threshold {
        match self.kind {
            Kind::Erw => self.m,
            _ => Threshold::Infinite,
        }
    }

    pub fn params(&self, beta: f64) -> LabResult<WalkParams> {
        let m = match self.m {
            Threshold::Finite(m) => Excitation::finite(m)?,
            Threshold::Infinite => Excitation::Infinite,
        };
        let kind = match self.kind {
            Kind::Erw => WalkKind::MErw,
            Kind::BiasedSrw => WalkKind::BiasedSrw,
            Kind::Symmetric => WalkKind::Symmetric,
        };
        let m = if kind == WalkKind::MErw {
            m
        } else {
            Excitation::Infinite
        };
        let p = WalkParams {
            d: self.d,
            m,
            beta,
            kind,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> LabResult<()> {
        for beta in self.betas()? {
            self.params(beta)?;
        }
        if self.n == 0 {
            return Err(LabError::Config("n must be at least 1".into()));
        }
        if self.replicates == 0 {
            return Err(LabError::Config("replicates must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(LabError::Config("workers must be at least 1".into()));
        }
        if self.estimators.contains(&EstimatorKind::Truncated) && self.windows.is_empty() {
            return Err(LabError::Config("truncated estimator needs windows".into()));
        }
        if self.windows.contains(&0) {
            return Err(LabError::Config("windows must be positive".into()));
        }
        if self
            .estimators
            .contains(&EstimatorKind::DerivativeDifference)
        {
            let h = self
                .h
                .ok_or_else(|| LabError::Config("derivative_difference needs h".into()))?;
            for beta in self.betas()? {
                if !(h > 0.0 && beta - h >= 0.0 && beta + h <= 1.0) {
                    return Err(LabError::Config(format!(
                        "h = {h} leaves [0, 1] around beta = {beta}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_accepts_numbers_and_inf() {
        let c = ExperimentConfig::from_json(r#"{"d":3,"m":"inf","beta":0.2,"n":10}"#).unwrap();
        assert_eq!(c.m, Threshold::Infinite);
        let c = ExperimentConfig::from_json(r#"{"d":3,"m":4,"beta":0.2,"n":10}"#).unwrap();
        assert_eq!(c.m, Threshold::Finite(4));
        assert!(ExperimentConfig::from_json(r#"{"d":3,"m":0,"beta":0.2,"n":10}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"d":3,"m":"many","beta":0.2,"n":10}"#).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut c = ExperimentConfig::new(4, 0.3, 1000);
        c.beta = None;
        c.beta_grid = Some(vec![0.1, 0.2]);
        c.m = Threshold::Infinite;
        c.estimators = vec![EstimatorKind::Derivative, EstimatorKind::Truncated];
        c.windows = vec![2, 4];
        c.burnin = Some(50);
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn schema_mismatch_is_rejected() {
        let err = ExperimentConfig::from_json(r#"{"schema_version":9,"d":2,"beta":0.1,"n":5}"#);
        assert!(matches!(err, Err(LabError::SchemaVersion { found: 9, .. })));
    }

    #[test]
    fn validation_catches_bad_grids() {
        let mut c = ExperimentConfig::new(2, 0.5, 10);
        c.beta_grid = Some(vec![0.1]);
        assert!(c.validate().is_err());
        c.beta_grid = None;
        c.estimators = vec![EstimatorKind::DerivativeDifference];
        c.h = Some(0.6);
        assert!(c.validate().is_err());
        c.h = Some(0.05);
        c.validate().unwrap();
        c.beta = Some(1.5);
        assert!(c.validate().is_err());
    }
}
