//! Run manifests and the output set every command writes.
//!
//! A command stages its result files in memory and writes them only once
//! everything succeeded, each file atomically, with `manifest.json` last.
//! The manifest holds no timestamps or output paths, so rerunning a
//! command into another directory reproduces every file byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult, Context};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Arguments after the program name, without `--out-dir`.
    pub command: Vec<String>,
    /// Every setting the run used, including localizer configurations.
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads an input file and records its digest.
pub fn read_input(role: &str, path: &Path) -> CliResult<(Vec<u8>, FileDigest)> {
    let bytes = fs::read(path)
        .map_err(|e| srlknn_core::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
        .context(|| format!("reading {role}"))?;
    let digest = FileDigest {
        role: role.to_string(),
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    };
    Ok((bytes, digest))
}

/// Removes `--out-dir <dir>` and `--out-dir=<dir>` from an argument list.
pub fn strip_out_dir(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
        } else if a == "--out-dir" {
            skip = true;
        } else if !a.starts_with("--out-dir=") {
            out.push(a.clone());
        }
    }
    out
}

/// Result files staged for one run.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    /// Stages a file; `name` is relative to the output directory.
    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    pub fn add_json<T: Serialize>(&mut self, name: impl Into<String>, value: &T) {
        let mut text = serde_json::to_string_pretty(value).expect("results serialize");
        text.push('\n');
        self.add(name, text);
    }

    /// Writes every staged file, then the manifest describing them.
    pub fn commit(
        self,
        command: Vec<String>,
        config: serde_json::Value,
        seeds: Vec<u64>,
        inputs: Vec<FileDigest>,
    ) -> CliResult<RunManifest> {
        let manifest = RunManifest {
            tool: env!("CARGO_BIN_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            config,
            seeds,
            inputs,
            outputs: self
                .files
                .iter()
                .map(|(name, bytes)| FileDigest {
                    role: "output".into(),
                    path: name.clone(),
                    sha256: sha256_hex(bytes),
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');

        for (name, bytes) in self.files.iter().map(|(n, b)| (n.as_str(), b.as_slice())) {
            self.write(name, bytes)?;
        }
        self.write(MANIFEST_FILE, text.as_bytes())?;
        Ok(manifest)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::Output {
                path: parent.to_path_buf(),
                source: e,
            })?;
        }
        srlknn_core::ingest::write_atomic(&path, bytes).map_err(|e| match e {
            srlknn_core::Error::Io { path, source } => CliError::Output { path, source },
            other => CliError::core(format!("writing {}", path.display()), other),
        })
    }
}

pub fn load_manifest(path: &Path) -> CliResult<RunManifest> {
    let (bytes, _) = read_input("manifest", path)?;
    serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Usage(format!("{}: not a run manifest: {e}", path.display())))
}

/// Checks that every recorded input still has the recorded content.
pub fn verify_inputs(manifest: &RunManifest) -> CliResult<()> {
    for input in &manifest.inputs {
        let (_, now) = read_input(&input.role, Path::new(&input.path))?;
        if now.sha256 != input.sha256 {
            return Err(CliError::Usage(format!(
                "{} ({}) changed since the manifest was written",
                input.path, input.role
            )));
        }
    }
    Ok(())
}
