//! File formats: scenarios, run configs, ground truth, per-frame results,
//! manifests, metric reports, curve CSVs and SVG plots.
//!
//! Everything is text. JSON is written with sorted keys, so identical inputs
//! give byte-identical files.

pub mod config;
pub mod gt;
pub mod plot;
pub mod replay;
pub mod results;

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::IoError;
use crate::simworld::Scenario;

pub use config::{load_run_config, RunConfig, SuiteKind, SuiteSpec};
pub use gt::{load_gt, load_sequence_dir, parse_gt_str, GroundTruth};
pub use replay::ReplaySource;
pub use results::{read_result, write_result, Manifest, ManifestEntry, ResultHeader, RunStatus, Timing};

pub(crate) fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    let wrap = |source| IoError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(wrap)?;
    }
    fs::write(path, text).map_err(wrap)
}

/// Serializes through `serde_json::Value`, whose maps keep keys sorted.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    serde_json::to_value(value)
        .and_then(|v| serde_json::to_string(&v))
        .expect("config types serialize to JSON")
}

pub fn canonical_json_pretty<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report types serialize to JSON");
    let mut s = serde_json::to_string_pretty(&v).expect("JSON value serializes");
    s.push('\n');
    s
}

/// Hex SHA-256 of the canonical JSON form.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    hex::encode(Sha256::digest(canonical_json(value).as_bytes()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    write_text(path, &canonical_json_pretty(value))
}

fn json_error(path: &Path, e: &serde_json::Error) -> IoError {
    IoError::Schema {
        path: path.display().to_string(),
        msg: format!("line {} column {}: {e}", e.line(), e.column()),
    }
}

/// Loads a scenario file and checks it, reporting every violation found.
pub fn load_scenario(path: &Path) -> Result<Scenario, IoError> {
    let text = read_text(path)?;
    let sc: Scenario = serde_json::from_str(&text).map_err(|e| json_error(path, &e))?;
    sc.validate().map_err(|e| IoError::Schema {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    Ok(sc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simworld::suites::poisoning_scenario;
    use crate::tracker::TrackerConfig;

    #[test]
    fn hash_tracks_semantic_fields_only() {
        let a = TrackerConfig::full();
        assert_eq!(config_hash(&a), config_hash(&TrackerConfig::full()));
        assert_ne!(config_hash(&a), config_hash(&a.with_alpha(0.2)));
        assert_ne!(config_hash(&a), config_hash(&TrackerConfig::baseline()));
        let mut g = a;
        g.gate.n_mem += 1;
        assert_ne!(config_hash(&a), config_hash(&g));
        assert_eq!(config_hash(&a).len(), 64);
    }

    #[test]
    fn hash_ignores_key_order_and_whitespace() {
        let a = TrackerConfig::full();
        let text = canonical_json_pretty(&a);
        let reparsed: TrackerConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(config_hash(&a), config_hash(&reparsed));
        let v: serde_json::Value = serde_json::from_str(
            r#"{"motion_enabled": true, "memory_mode": "motion_aware"}"#,
        )
        .unwrap();
        let partial: TrackerConfig = serde_json::from_value(v).unwrap();
        assert_eq!(config_hash(&partial), config_hash(&a));
    }

    #[test]
    fn scenario_round_trip_and_diagnostics() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.json");
        write_json(&p, &poisoning_scenario()).unwrap();
        assert_eq!(load_scenario(&p).unwrap(), poisoning_scenario());

        write_text(&p, "{\n  \"name\": \"x\",\n  \"bogus\": 1\n}\n").unwrap();
        let msg = load_scenario(&p).unwrap_err().to_string();
        assert!(msg.contains("line 3"), "{msg}");

        let mut bad = poisoning_scenario();
        bad.num_frames = 0;
        bad.grid_w = 0;
        write_json(&p, &bad).unwrap();
        let msg = load_scenario(&p).unwrap_err().to_string();
        assert!(msg.contains("num_frames") && msg.contains("grid"), "{msg}");
    }
}
