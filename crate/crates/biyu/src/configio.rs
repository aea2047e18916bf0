//! Protocol config files and config patches.
//!
//! Configs are plain JSON mirroring [`ProtocolConfig`]. Patches use JSON
//! merge-patch semantics (objects merge recursively, null deletes,
//! anything else replaces) and name the config version they apply to.

use std::path::Path;

use biyu_core::protocol::ProtocolConfig;
use serde_json::Value;

use crate::error::{Error, Result};

pub fn load_config(path: &Path) -> Result<ProtocolConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn save_config(path: &Path, config: &ProtocolConfig) -> Result<()> {
    let json = serde_json::to_string_pretty(config).expect("config serializes");
    std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

/// JSON merge-patch: recursive object merge, null removes a key, any
/// non-object value replaces.
pub fn merge_patch(base: &Value, patch: &Value) -> Value {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            let mut merged = b.clone();
            for (key, pv) in p {
                if pv.is_null() {
                    merged.remove(key);
                } else {
                    let bv = merged.get(key).cloned().unwrap_or(Value::Null);
                    merged.insert(key.clone(), merge_patch(&bv, pv));
                }
            }
            Value::Object(merged)
        }
        (_, replacement) => replacement.clone(),
    }
}

/// A structured config diff: the version it applies to plus the
/// merge-patch body.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ConfigPatchFile {
    pub base_version: String,
    pub patch: Value,
}

pub fn load_patch(path: &Path) -> Result<ConfigPatchFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::PatchConflict(format!("{}: {e}", path.display())))
}

/// Applies a patch to a config. The patch must name the config's
/// version, and the merged JSON must still deserialize as a config.
pub fn apply_patch(config: &ProtocolConfig, patch: &ConfigPatchFile) -> Result<ProtocolConfig> {
    if patch.base_version != config.version {
        return Err(Error::PatchConflict(format!(
            "patch targets version {:?} but config is {:?}",
            patch.base_version, config.version
        )));
    }
    let base = serde_json::to_value(config).expect("config serializes");
    let merged = merge_patch(&base, &patch.patch);
    serde_json::from_value(merged)
        .map_err(|e| Error::PatchConflict(format!("patched config invalid: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use biyu_core::protocol::ProtocolId;
    use serde_json::json;

    #[test]
    fn config_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.json");
        let config = ProtocolConfig::default_for(ProtocolId::D);
        save_config(&path, &config).unwrap();
        let back = load_config(&path).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn merge_patch_semantics() {
        let base = json!({"a": 1, "b": {"x": 1, "y": 2}, "c": [1, 2]});
        let patch = json!({"a": null, "b": {"y": 3}, "c": [9]});
        let merged = merge_patch(&base, &patch);
        assert_eq!(merged, json!({"b": {"x": 1, "y": 3}, "c": [9]}));
    }

    #[test]
    fn patch_adds_a_marker() {
        let mut config = ProtocolConfig::default_for(ProtocolId::D);
        config.markers = vec!["像".to_string(), "如".to_string()];
        let patch = ConfigPatchFile {
            base_version: config.version.clone(),
            patch: json!({
                "markers": ["像", "如", "宛如"],
                "version": "d-1.0.1",
            }),
        };
        let patched = apply_patch(&config, &patch).unwrap();
        assert!(patched.markers.contains(&"宛如".to_string()));
        assert_eq!(patched.version, "d-1.0.1");
        // The base config is untouched.
        assert_eq!(config.markers.len(), 2);
    }

    #[test]
    fn version_mismatch_is_a_conflict() {
        let config = ProtocolConfig::default_for(ProtocolId::D);
        let patch = ConfigPatchFile {
            base_version: "d-0.0.9".to_string(),
            patch: json!({}),
        };
        let err = apply_patch(&config, &patch).unwrap_err();
        assert_eq!(err.kind(), "patch-conflict");
    }

    #[test]
    fn identity_patch_changes_nothing() {
        let config = ProtocolConfig::default_for(ProtocolId::B);
        let patch = ConfigPatchFile {
            base_version: config.version.clone(),
            patch: json!({}),
        };
        assert_eq!(apply_patch(&config, &patch).unwrap(), config);
    }
}
