//! Provenance record embedded in every artifact.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    /// `(path, sha256 of contents)` per input file.
    pub inputs: Vec<(String, String)>,
    pub params: serde_json::Map<String, serde_json::Value>,
    /// Seconds since the Unix epoch; not part of the hash.
    pub created: u64,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: None,
            inputs: Vec::new(),
            params: serde_json::Map::new(),
            created: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }

    pub fn input(&mut self, path: &Path, digest: &str) {
        self.inputs.push((path.display().to_string(), digest.to_string()));
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.params.insert(key.into(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
    }

    /// SHA-256 over everything except the timestamp.
    pub fn hash(&self) -> String {
        let mut m = self.clone();
        m.created = 0;
        // input paths vary between machines; contents are hashed
        for (p, _) in &mut m.inputs {
            *p = Path::new(p.as_str()).file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        }
        let bytes = serde_json::to_vec(&m).expect("manifest serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}
