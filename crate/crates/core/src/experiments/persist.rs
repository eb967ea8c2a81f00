//! Result persistence: one CSV per figure/table plus a JSON run manifest.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::Result;

/// Metadata persisted next to each experiment's data files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seed: u64,
    pub created_unix_s: u64,
    pub crate_version: String,
    /// Spreading draws redrawn because of a singular Gram matrix.
    pub resampled_realizations: usize,
}

impl RunManifest {
    pub fn new(experiment: &str, config: &ExperimentConfig, resampled: usize) -> Self {
        Self {
            experiment: experiment.to_string(),
            config: config.clone(),
            config_hash: config_hash(config),
            seed: config.seed,
            created_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            resampled_realizations: resampled,
        }
    }
}

/// FNV-1a over the canonical JSON encoding of the config.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in json.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Resolve the output directory `<base>/<experiment>/<timestamp>/`, creating
/// it. With `exact_dir` set (tests, scripted runs) the base is used as-is.
pub fn prepare_output_dir(base: &Path, experiment: &str, exact_dir: bool) -> Result<PathBuf> {
    let dir = if exact_dir {
        base.to_path_buf()
    } else {
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        base.join(experiment).join(stamp.to_string())
    };
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Write the manifest as pretty JSON (stable field order, trailing newline).
pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<PathBuf> {
    let path = dir.join("manifest.json");
    let mut json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    json.push('\n');
    std::fs::write(&path, json)?;
    Ok(path)
}

/// Load a manifest back.
pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| crate::error::Error::Io(std::io::Error::other(e)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_bytes() {
        let config = ExperimentConfig::default();
        let manifest = RunManifest::new("table1", &config, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = write_manifest(dir.path(), &manifest).unwrap();
        let loaded = read_manifest(&path).unwrap();
        assert_eq!(loaded, manifest);
        // Re-serializing the loaded manifest reproduces the bytes.
        let original = std::fs::read(&path).unwrap();
        write_manifest(dir.path(), &loaded).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), original);
    }

    #[test]
    fn hash_tracks_config_changes() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.seed = 1;
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a), config_hash(&a.clone()));
    }
}
