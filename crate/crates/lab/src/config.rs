//! JSON experiment configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Ascending coefficients.
    #[serde(default)]
    pub coeffs: Vec<i64>,
    #[serde(default = "default_k")]
    pub k: u32,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(default)]
    pub checkpoints: Vec<u64>,
    #[serde(default = "default_system")]
    pub system: String,
    #[serde(default = "default_condition")]
    pub condition: String,
    #[serde(default = "default_argmap")]
    pub argmap: String,
    #[serde(rename = "P", default = "default_p")]
    pub p: u64,
    /// Output path stem; `None` writes to standard output.
    #[serde(default)]
    pub out: Option<String>,
}

fn default_k() -> u32 {
    2
}

fn default_system() -> String {
    "twopoint:1,-1,0".into()
}

fn default_condition() -> String {
    "all".into()
}

fn default_argmap() -> String {
    "id".into()
}

fn default_p() -> u64 {
    1_000_000
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checkpoints, defaulting to `[N]`.
    pub fn effective_checkpoints(&self) -> Vec<u64> {
        if self.checkpoints.is_empty() {
            vec![self.n]
        } else {
            self.checkpoints.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(r#"{"name":"x","N":100}"#).unwrap();
        assert_eq!(c.k, 2);
        assert_eq!(c.effective_checkpoints(), [100]);
        assert!(ExperimentConfig::from_json(r#"{"name":"x","N":100,"bogus":1}"#).is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip(name in "[a-z]{1,8}", coeffs in proptest::collection::vec(-99i64..99, 0..5),
                           k in 2u32..5, n in 1u64..1_000_000, cps in proptest::collection::vec(1u64..1000, 0..4),
                           p in 2u64..1_000_000, out in proptest::option::of("[a-z]{1,6}")) {
            let c = ExperimentConfig {
                name, coeffs, k, n, checkpoints: cps,
                system: "twopoint:1,-1,0".into(), condition: "kfree:1,0,1:2".into(), argmap: "prog:3,1".into(),
                p, out,
            };
            prop_assert_eq!(ExperimentConfig::from_json(&c.to_json().unwrap()).unwrap(), c);
        }
    }
}
