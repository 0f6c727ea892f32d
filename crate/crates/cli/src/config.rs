//! Resolved run configuration: built-in defaults, overlaid by a JSON file,
//! overlaid by command-line flags.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndiv_core::diversity::DEFAULT_ENTROPY_BINS;
use ndiv_core::projection::DEFAULT_RANK;
use ndiv_core::{
    CalibrationConfig, DiversityConfig, DiversityStatistic, Fallback, Method, PipelineConfig, Reference,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Pair budget per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pairs {
    #[default]
    Full,
    Budget(usize),
}

impl Pairs {
    pub fn budget(self) -> Option<usize> {
        match self {
            Pairs::Full => None,
            Pairs::Budget(k) => Some(k),
        }
    }
}

impl FromStr for Pairs {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("full") {
            return Ok(Pairs::Full);
        }
        match s.parse::<usize>() {
            Ok(0) => Err("pair budget must be at least 1".into()),
            Ok(k) => Ok(Pairs::Budget(k)),
            Err(_) => Err(format!("expected `full` or a positive integer, got `{s}`")),
        }
    }
}

impl fmt::Display for Pairs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pairs::Full => f.write_str("full"),
            Pairs::Budget(k) => write!(f, "{k}"),
        }
    }
}

impl Serialize for Pairs {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Pairs::Full => s.serialize_str("full"),
            Pairs::Budget(k) => s.serialize_u64(*k as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Pairs {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Count(u64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Count(k) => Pairs::from_str(&k.to_string()),
            Repr::Text(t) => Pairs::from_str(&t),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Threshold multiplier, or `none` to skip binary predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambda(pub Option<f64>);

impl FromStr for Lambda {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("none") {
            return Ok(Lambda(None));
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Lambda(Some(v))),
            _ => Err(format!("expected a finite number or `none`, got `{s}`")),
        }
    }
}

/// Parses a value through its serde name, e.g. `median_of_valid`.
pub fn parse_enum<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub method: Method,
    pub rank: usize,
    pub statistic: DiversityStatistic,
    pub entropy_bins: usize,
    pub reference: Reference,
    pub fallback: Fallback,
    pub pairs: Pairs,
    /// `null` disables thresholding.
    pub lambda: Option<f64>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: Method::NeighborDiv,
            rank: DEFAULT_RANK,
            statistic: DiversityStatistic::Variance,
            entropy_bins: DEFAULT_ENTROPY_BINS,
            reference: Reference::Median,
            fallback: Fallback::Zero,
            pairs: Pairs::Full,
            lambda: Some(ndiv_core::calibration::DEFAULT_LAMBDA),
            seed: 0,
            edges: None,
            features: None,
            labels: None,
            out_dir: None,
        }
    }
}

impl RunConfig {
    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            method: self.method,
            rank: self.rank,
            seed: self.seed,
            diversity: DiversityConfig {
                statistic: self.statistic,
                sampling_budget: self.pairs.budget(),
                entropy_bins: self.entropy_bins,
                master_seed: self.seed,
            },
            calibration: CalibrationConfig {
                reference: self.reference,
                fallback: self.fallback,
                threshold_lambda: self.lambda,
            },
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.rank == 0 {
            return Err(CliError::Usage("--rank must be at least 1".into()));
        }
        self.pipeline().diversity.validate().map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Copy without the output directory, as recorded in reports.
    pub fn recorded(&self) -> Self {
        Self {
            out_dir: None,
            ..self.clone()
        }
    }

    /// Hex SHA-256 of the canonical JSON form, ignoring the output directory.
    pub fn digest(&self) -> String {
        digest_of(&self.recorded())
    }
}

pub fn digest_of<T: Serialize>(value: &T) -> String {
    let canonical = serde_json::to_value(value).and_then(|v| serde_json::to_string(&v)).unwrap_or_default();
    let hash = Sha256::digest(canonical.as_bytes());
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads a JSON object whose absent keys keep their defaults.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}
