//! Run manifests: what was run, with which seed streams, producing which
//! bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::qmat::parse_json;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileDigest {
    pub fn of_bytes(path: impl Into<PathBuf>, bytes: &[u8]) -> Self {
        Self {
            path: path.into(),
            sha256: sha256_hex(bytes),
        }
    }

    pub fn of_file(path: &Path) -> Result<Self> {
        Ok(Self::of_bytes(path, &fs::read(path)?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    /// Labels of the seed streams drawn from the root seed.
    pub seed_streams: Vec<String>,
    pub started_utc: String,
    pub finished_utc: String,
    pub inputs: Vec<FileDigest>,
    /// Paths relative to the manifest's directory.
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        parse_json(&fs::read_to_string(path)?)
    }

    /// Recomputes every digest; a missing or altered file is an error.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for f in self.inputs.iter().map(|f| (f, f.path.clone())).chain(
            self.outputs.iter().map(|f| (f, dir.join(&f.path))),
        ) {
            let (expected, path) = f;
            let actual = FileDigest::of_file(&path)
                .map_err(|e| Error::Invariant(format!("cannot read {}: {e}", path.display())))?;
            if actual.sha256 != expected.sha256 {
                return Err(Error::Invariant(format!("digest mismatch for {}", path.display())));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verify_detects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.csv"), b"x,y\n1,2\n").unwrap();
        let m = RunManifest {
            artifact_version: "0".into(),
            command: "test".into(),
            config_sha256: sha256_hex(b"{}"),
            seed: 1,
            seed_streams: vec![],
            started_utc: String::new(),
            finished_utc: String::new(),
            inputs: vec![],
            outputs: vec![FileDigest::of_bytes("a.csv", b"x,y\n1,2\n")],
        };
        m.verify(dir.path()).unwrap();
        fs::write(dir.path().join("a.csv"), b"x,y\n1,3\n").unwrap();
        assert!(matches!(m.verify(dir.path()), Err(Error::Invariant(_))));
    }
}
