//! Versioned JSON artifacts and CSV sidecars carrying provenance hashes.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shapelet_core::forest::Evaluation;
use shapelet_core::{ForestModel, ShapeletSet};

use crate::config::{sha256_hex, RunConfig};
use crate::error::{CliError, Result};
use crate::io::{from_json, read_bytes};

pub const ARTIFACT_VERSION: u32 = 1;

pub const SHAPELETS_FORMAT: &str = "shapelet-set";
pub const MODEL_FORMAT: &str = "forest-model";
pub const METRICS_FORMAT: &str = "evaluation";
pub const CSV_META_FORMAT: &str = "csv-meta";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeletArtifact {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub input_sha256: String,
    pub config: RunConfig,
    pub shapelet_set: ShapeletSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelArtifact {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub input_sha256: String,
    pub config: RunConfig,
    pub model: ForestModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsArtifact {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub input_sha256: String,
    pub model_sha256: String,
    pub shapelet_fingerprint: String,
    pub evaluation: Evaluation,
}

/// Sidecar written next to every CSV artifact as `<csv>.meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvMeta {
    pub format: String,
    pub version: u32,
    /// What the CSV holds: `dataset`, `transform` or `predictions`.
    pub kind: String,
    pub config_hash: String,
    pub input_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shapelet_fingerprint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_sha256: Option<String>,
    pub artifact_sha256: String,
    pub rows: usize,
}

pub fn meta_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// SHA-256 of the compact JSON encoding of the set.
pub fn fingerprint(set: &ShapeletSet) -> String {
    sha256_hex(&serde_json::to_vec(set).expect("shapelet set serializes"))
}

fn check_header(path: &Path, format: &str, version: u32, expected: &str) -> Result<()> {
    if format != expected || version != ARTIFACT_VERSION {
        return Err(CliError::format(format!(
            "{}: expected a `{expected}` artifact version {ARTIFACT_VERSION}, found `{format}` version {version}",
            path.display()
        )));
    }
    Ok(())
}

pub fn load_shapelets(path: &Path) -> Result<(ShapeletArtifact, String)> {
    let art: ShapeletArtifact = from_json(path, &read_bytes(path)?)?;
    check_header(path, &art.format, art.version, SHAPELETS_FORMAT)?;
    let fp = fingerprint(&art.shapelet_set);
    Ok((art, fp))
}

/// Returns the artifact and the SHA-256 of its file.
pub fn load_model(path: &Path) -> Result<(ModelArtifact, String)> {
    let bytes = read_bytes(path)?;
    let art: ModelArtifact = from_json(path, &bytes)?;
    check_header(path, &art.format, art.version, MODEL_FORMAT)?;
    Ok((art, sha256_hex(&bytes)))
}

/// Reads `<csv>.meta.json` and checks it describes `csv_bytes`.
pub fn load_csv_meta(csv: &Path, csv_bytes: &[u8], kind: &str) -> Result<CsvMeta> {
    let path = meta_path(csv);
    let meta: CsvMeta = from_json(&path, &read_bytes(&path)?)?;
    check_header(&path, &meta.format, meta.version, CSV_META_FORMAT)?;
    if meta.kind != kind {
        return Err(CliError::mismatch(format!(
            "{} describes a `{}` file, expected `{kind}`",
            path.display(),
            meta.kind
        )));
    }
    if meta.artifact_sha256 != sha256_hex(csv_bytes) {
        return Err(CliError::mismatch(format!(
            "{} was modified after {} was written",
            csv.display(),
            path.display()
        )));
    }
    Ok(meta)
}

/// Refuses to continue unless every fingerprint names the same shapelet set.
pub fn check_fingerprints(expected: &str, found: &[(&str, Option<&str>)]) -> Result<()> {
    for (what, fp) in found {
        match fp {
            Some(fp) if *fp == expected => {}
            Some(fp) => {
                return Err(CliError::mismatch(format!(
                    "shapelet fingerprint mismatch: {what} was built from {fp}, the supplied shapelet set is {expected}"
                )))
            }
            None => {
                return Err(CliError::mismatch(format!(
                    "{what} records no shapelet fingerprint"
                )))
            }
        }
    }
    Ok(())
}
