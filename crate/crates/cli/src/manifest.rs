use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use impostor::record::write_atomic;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Record of one command invocation: what went in, what came out, and the
/// exact configuration and seeds used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub stage_versions: BTreeMap<String, String>,
    pub config_sha256: String,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub started_at: String,
    pub finished_at: String,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn start(command: &str, config: &Config) -> Result<Self, CliError> {
        let value = serde_json::to_value(config)
            .map_err(|e| CliError::Config(format!("config not serializable: {e}")))?;
        let canonical = serde_json::to_vec(&value).expect("json value");
        let mut stage_versions = BTreeMap::new();
        stage_versions.insert(
            "model_format".to_string(),
            impostor::nn::FORMAT_VERSION.to_string(),
        );
        stage_versions.insert("core".to_string(), env!("CARGO_PKG_VERSION").to_string());
        Ok(Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            stage_versions,
            config_sha256: sha256_hex(&canonical),
            config: value,
            seeds: config
                .seeds()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            started_at: now(),
            finished_at: String::new(),
        })
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = fs::read(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push(digest(path, &bytes));
        Ok(bytes)
    }

    pub fn read_input_string(&mut self, path: &Path) -> Result<String, CliError> {
        String::from_utf8(self.read_input(path)?)
            .map_err(|_| CliError::data(format!("{} is not UTF-8", path.display())))
    }

    /// Writes an output atomically and records its digest.
    pub fn write_output(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        write_atomic(path, bytes)?;
        self.outputs.push(digest(path, bytes));
        Ok(())
    }

    /// Writes the manifest itself as `manifest-<command>.json` in `dir`.
    pub fn finish(mut self, dir: &Path) -> Result<PathBuf, CliError> {
        self.finished_at = now();
        let path = dir.join(format!("manifest-{}.json", self.command));
        let mut body = serde_json::to_string_pretty(&self).expect("plain struct");
        body.push('\n');
        write_atomic(&path, body.as_bytes())?;
        Ok(path)
    }
}

fn digest(path: &Path, bytes: &[u8]) -> FileDigest {
    FileDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(bytes),
        bytes: bytes.len() as u64,
    }
}
