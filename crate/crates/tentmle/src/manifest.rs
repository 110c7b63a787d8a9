//! Run manifests: enough metadata next to every output file to replay the
//! run and get byte-identical results.

use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Result;

/// Written alongside every CLI output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Fully resolved options, including defaults.
    pub options: serde_json::Value,
    pub seed: u64,
    pub inputs: Vec<InputDigest>,
    pub wall_clock_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl RunManifest {
    pub fn new(subcommand: &str, options: serde_json::Value, seed: u64) -> Self {
        RunManifest {
            tool: "tentmle".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            options,
            seed,
            inputs: Vec::new(),
            wall_clock_ms: 0,
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex(&Sha256::digest(&bytes)),
        });
        Ok(())
    }

    pub fn set_elapsed(&mut self, elapsed: Duration) {
        self.wall_clock_ms = elapsed.as_millis();
    }

    /// Write `<out>.manifest.json` next to an output file.
    pub fn write_alongside(&self, out: &Path) -> Result<()> {
        let mut path = out.as_os_str().to_owned();
        path.push(".manifest.json");
        let body = serde_json::to_string_pretty(self)?;
        std::fs::write(path, body)?;
        Ok(())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vectors() {
        assert_eq!(
            hex(&Sha256::digest(b"")),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            hex(&Sha256::digest(b"abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
