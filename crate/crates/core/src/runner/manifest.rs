use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::Result;

/// `serde_json` formatter printing every float with 17 significant digits.
struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// Pretty-enough JSON with 17-digit floats. Non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("json is utf-8"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub kind: String,
    pub code_version: String,
    /// sha256 of the effective config as TOML.
    pub config_sha256: String,
    pub config: ExperimentConfig,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub artifacts: Vec<Artifact>,
    pub passed: bool,
    pub error: Option<String>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Single writer for one output directory; records every file it writes.
pub struct ArtifactWriter {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
    started: u64,
}

impl ArtifactWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
            started: now(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.artifacts.retain(|a| a.path != name);
        self.artifacts.push(Artifact {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = to_json(value)?;
        self.write(name, text.as_bytes())
    }

    /// Write the manifest last; it lists everything written before it.
    pub fn finish(self, config: &ExperimentConfig, passed: bool, error: Option<String>) -> Result<RunManifest> {
        let toml = config.to_toml();
        let manifest = RunManifest {
            kind: config.kind.map(|k| k.name().to_string()).unwrap_or_default(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: sha256_hex(toml.as_bytes()),
            config: config.clone(),
            started_unix: self.started,
            finished_unix: now(),
            artifacts: self.artifacts,
            passed,
            error,
        };
        std::fs::write(self.dir.join(MANIFEST_NAME), to_json(&manifest)?)?;
        Ok(manifest)
    }
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(dir.join(MANIFEST_NAME))?)?)
    }

    /// Files listed with a wrong checksum or missing.
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        self.artifacts
            .iter()
            .filter(|a| match std::fs::read(dir.join(&a.path)) {
                Ok(bytes) => sha256_hex(&bytes) != a.sha256,
                Err(_) => true,
            })
            .map(|a| a.path.clone())
            .collect()
    }
}
