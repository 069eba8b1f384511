//! `run.json`: the resolved configuration and input digests of one run.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

pub const RUN_FILE: &str = "run.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, enough to replay the run.
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub threads: usize,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
}

impl RunRecord {
    pub fn new(command: &str, args: &[String], seed: Option<u64>, threads: usize) -> Self {
        RunRecord {
            tool: "forge".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            args: args.to_vec(),
            seed,
            threads,
            config: serde_json::Value::Null,
            inputs: Vec::new(),
        }
    }

    pub fn config<T: Serialize>(mut self, config: &T) -> Result<Self> {
        self.config = serde_json::to_value(config)?;
        Ok(self)
    }

    pub fn input(mut self, role: &str, path: &Path) -> Result<Self> {
        let path = path.canonicalize().unwrap_or_else(|_| path.to_path_buf());
        self.inputs.push(InputDigest {
            role: role.into(),
            sha256: digest_path(&path)?,
            path,
        });
        Ok(self)
    }

    pub fn input_path(&self, role: &str) -> Option<&Path> {
        self.inputs.iter().find(|i| i.role == role).map(|i| i.path.as_path())
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(RUN_FILE);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let path = if path.is_dir() { path.join(RUN_FILE) } else { path.to_path_buf() };
        let text = std::fs::read_to_string(&path).map_err(|e| forge_core::Error::Io {
            path: path.clone(),
            source: e,
        })?;
        Ok(serde_json::from_str(&text).map_err(forge_core::Error::from)?)
    }
}

fn hash_file(path: &Path, hasher: &mut Sha256) -> Result<()> {
    let file = File::open(path).map_err(|e| forge_core::Error::Io {
        path: path.to_owned(),
        source: e,
    })?;
    let mut reader = BufReader::new(file);
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            return Ok(());
        }
        hasher.update(&buf[..n]);
    }
}

/// sha256 of a file, or of a directory's files (sorted relative paths and
/// contents, `run.json` excluded).
pub fn digest_path(path: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    if path.is_dir() {
        for entry in WalkDir::new(path).sort_by_file_name() {
            let entry = entry?;
            if !entry.file_type().is_file() || entry.file_name() == RUN_FILE {
                continue;
            }
            let rel = entry.path().strip_prefix(path)?;
            hasher.update(rel.to_string_lossy().as_bytes());
            hasher.update([0]);
            hash_file(entry.path(), &mut hasher)?;
        }
    } else {
        hash_file(path, &mut hasher)?;
    }
    Ok(hex::encode(hasher.finalize()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directory_digest_ignores_run_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.txt"), "x").unwrap();
        let before = digest_path(dir.path()).unwrap();
        std::fs::write(dir.path().join(RUN_FILE), "{}").unwrap();
        assert_eq!(digest_path(dir.path()).unwrap(), before);
        std::fs::write(dir.path().join("a.txt"), "y").unwrap();
        assert_ne!(digest_path(dir.path()).unwrap(), before);
    }

    #[test]
    fn record_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("in.txt");
        std::fs::write(&f, "abc").unwrap();
        let rec = RunRecord::new("plan", &["plan".into()], Some(3), 1)
            .input("tokens", &f)
            .unwrap();
        rec.write(dir.path()).unwrap();
        assert_eq!(RunRecord::load(dir.path()).unwrap(), rec);
        assert_eq!(
            rec.inputs[0].sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
