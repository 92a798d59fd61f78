use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{CliError, CliResult};

/// Provenance record written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub arguments: serde_json::Value,
    pub input_digests: BTreeMap<String, String>,
    pub tool_version: &'static str,
    pub seed: Option<u64>,
    pub output_digests: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(command: &'static str, arguments: serde_json::Value, seed: Option<u64>) -> Self {
        RunManifest {
            command,
            arguments,
            input_digests: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION"),
            seed,
            output_digests: BTreeMap::new(),
        }
    }

    pub fn input(&mut self, path: &Path, text: &str) {
        self.input_digests.insert(path.display().to_string(), sha256_hex(text.as_bytes()));
    }

    /// Writes `contents` to `path`, then the manifest to `<path>.manifest.json`.
    pub fn write_output(mut self, path: &Path, contents: &str) -> CliResult<PathBuf> {
        std::fs::write(path, contents).map_err(|e| CliError::io(path, e))?;
        self.output_digests.insert(path.display().to_string(), sha256_hex(contents.as_bytes()));
        let mut name = path.as_os_str().to_owned();
        name.push(".manifest.json");
        let manifest_path = PathBuf::from(name);
        let text = serde_json::to_string_pretty(&self).expect("manifest serializes") + "\n";
        std::fs::write(&manifest_path, text).map_err(|e| CliError::io(&manifest_path, e))?;
        Ok(manifest_path)
    }
}
