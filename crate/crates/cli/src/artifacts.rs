//! Deterministic artifact writing and the run manifest. Identical manifests
//! reproduce byte-identical files: nothing time- or environment-dependent is
//! ever serialized.

use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config_hash: String,
    /// resolved command parameters (sorted keys)
    pub parameters: std::collections::BTreeMap<String, Value>,
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &str, config_hash: String, seed: Option<u64>) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_hash,
            parameters: Default::default(),
            seed,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
        self
    }
}

/// Write `manifest.json`, `result.json` and any extra named files.
pub fn write(
    out: &Path,
    manifest: &RunManifest,
    result: &impl Serialize,
    extra: &[(&str, &str)],
) -> anyhow::Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let manifest_json = serde_json::to_string_pretty(manifest)?;
    std::fs::write(out.join("manifest.json"), manifest_json + "\n")?;
    let result_json = serde_json::to_string_pretty(result)?;
    std::fs::write(out.join("result.json"), result_json + "\n")?;
    for (name, contents) in extra {
        std::fs::write(out.join(name), contents)?;
    }
    Ok(())
}
