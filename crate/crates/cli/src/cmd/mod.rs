pub mod corpus;
pub mod mix;
pub mod needle;
pub mod plan;
pub mod replay;
pub mod report;

use std::path::Path;

use anyhow::Result;
use forge_core::Execution;
use serde::Serialize;

use crate::runlog::RunRecord;

/// Shared state handed to every command.
pub struct Ctx {
    pub exec: Execution,
    pub seed: Option<u64>,
    pub threads: usize,
    pub argv: Vec<String>,
}

impl Ctx {
    pub fn record(&self, command: &str) -> RunRecord {
        RunRecord::new(command, &self.argv, self.seed, self.threads)
    }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| forge_core::Error::Io {
        path: dir.to_owned(),
        source: e,
    })?;
    Ok(())
}

pub fn write_text(path: &Path, text: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, text).map_err(|e| forge_core::Error::Io {
        path: path.to_owned(),
        source: e,
    })?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, text)
}

pub fn read_text(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path).map_err(|e| forge_core::Error::Io {
        path: path.to_owned(),
        source: e,
    })?)
}

/// Fail with an I/O error (exit code 3) when an input path does not exist.
pub fn require(path: &Path) -> Result<()> {
    if !path.exists() {
        return Err(forge_core::Error::Io {
            path: path.to_owned(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        }
        .into());
    }
    Ok(())
}
