//! Reproducibility metadata embedded in every output file.
//!
//! The `created_at` timestamp is the only run-dependent field; it honors
//! `SOURCE_DATE_EPOCH` so byte-identical outputs are possible in CI.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ToolError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Input path -> sha256 of its content.
    pub inputs: BTreeMap<String, String>,
    /// Unix seconds; overridable via SOURCE_DATE_EPOCH.
    pub created_at: u64,
}

impl Provenance {
    pub fn new(command: impl Into<String>, seed: Option<u64>) -> Provenance {
        let created_at = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or_else(|| {
                SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            });
        Provenance {
            tool: "nestweak".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.into(),
            seed,
            inputs: BTreeMap::new(),
            created_at,
        }
    }

    /// Hash a file and record it as an input.
    pub fn add_input(&mut self, path: &Path) -> Result<(), ToolError> {
        let bytes = fs::read(path).map_err(|e| ToolError::io(path, e))?;
        self.inputs
            .insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}
