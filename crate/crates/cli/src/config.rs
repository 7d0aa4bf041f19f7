//! Run configuration file (TOML, `version = 1`).
//!
//! ```toml
//! version = 1
//! seed = 7
//!
//! [preprocess]
//! sample_rate_hz = 100.0
//! steps = [
//!   { op = "bandpass", low_hz = 4.0, high_hz = 10.0 },
//!   { op = "decimate", factor = 5 },
//!   { op = "segment", window_seconds = 300.0 },
//! ]
//!
//! [discovery]
//! min_len = 10
//! max_len = 40
//!
//! [forest]
//! n_trees = 500
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use shapelet_core::preprocess::TrailingWindow;
use shapelet_core::{DiscoveryConfig, ForestConfig};

use crate::error::{CliError, Result};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    /// Overrides the discovery, forest and balancing seeds when set.
    pub seed: Option<u64>,
    /// Default `--input` path; not part of the config hash.
    #[serde(skip_serializing)]
    pub input: Option<PathBuf>,
    /// Default `--output` path; not part of the config hash.
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
    pub preprocess: PreprocessConfig,
    pub discovery: DiscoveryConfig,
    pub forest: ForestConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            seed: None,
            input: None,
            output: None,
            preprocess: PreprocessConfig::default(),
            discovery: DiscoveryConfig::default(),
            forest: ForestConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    /// Sample rate of stream input; `--sample-rate` overrides it.
    pub sample_rate_hz: Option<f64>,
    /// Label written for unlabelled stream input.
    pub label: Option<String>,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Step {
    Bandpass {
        low_hz: f64,
        high_hz: f64,
    },
    Decimate {
        factor: usize,
    },
    Segment {
        window_seconds: f64,
        #[serde(default)]
        trailing: TrailingWindow,
    },
    RmsEnvelope {
        window: usize,
        #[serde(default)]
        side: EnvelopeSide,
    },
    ZeroUpcrossWaves,
    Balance {
        #[serde(default)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeSide {
    #[default]
    Upper,
    Lower,
    Both,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Format(msg) => CliError::format(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::format(e.to_string()))?;
        if cfg.version != CONFIG_VERSION {
            return Err(CliError::format(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    /// Applies a `--seed` flag and propagates the run seed into every stage.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if seed.is_some() {
            self.seed = seed;
        }
        if let Some(seed) = self.seed {
            self.discovery.seed = seed;
            self.forest.seed = seed;
            for step in &mut self.preprocess.steps {
                if let Step::Balance { seed: s @ None } = step {
                    *s = Some(seed);
                }
            }
        }
        self
    }

    /// SHA-256 of the canonical JSON encoding, paths excluded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        sha256_hex(&json)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let cfg = RunConfig::parse(
            r#"
            version = 1
            seed = 7
            [preprocess]
            sample_rate_hz = 100.0
            steps = [
              { op = "bandpass", low_hz = 4.0, high_hz = 10.0 },
              { op = "decimate", factor = 5 },
              { op = "segment", window_seconds = 300.0, trailing = "keep" },
              { op = "rms_envelope", window = 20, side = "both" },
              { op = "zero_upcross_waves" },
              { op = "balance" },
            ]
            [discovery]
            min_len = 10
            [forest]
            n_trees = 50
            "#,
        )
        .unwrap()
        .with_seed(None);
        assert_eq!(cfg.preprocess.steps.len(), 6);
        assert_eq!(cfg.discovery.seed, 7);
        assert_eq!(cfg.forest.seed, 7);
        assert_eq!(cfg.preprocess.steps[5], Step::Balance { seed: Some(7) });
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        assert!(RunConfig::parse("version = 2").is_err());
        assert!(RunConfig::parse("colour = 1").is_err());
        assert!(RunConfig::parse("[forest]\ntrees = 5").is_err());
        assert!(RunConfig::parse("[[preprocess.steps]]\nop = \"decimate\"\nfactr = 2").is_err());
    }

    #[test]
    fn hash_ignores_paths_but_not_settings() {
        let a = RunConfig::default();
        let b = RunConfig { input: Some("x.csv".into()), ..RunConfig::default() };
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::default().with_seed(Some(3));
        assert_ne!(a.hash(), c.hash());
    }
}
