//! Run manifests: what was run, with which parameters, and checksums of
//! everything it wrote.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context as _};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// File name inside the output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments as given, replayed by `percsim replay`.
    pub args: Vec<String>,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<OutputFile>,
    pub duration_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects the files a command writes.
pub struct Recorder {
    dir: PathBuf,
    started: Instant,
    outputs: Vec<OutputFile>,
}

impl Recorder {
    pub fn new(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Recorder {
            dir: dir.to_path_buf(),
            started: Instant::now(),
            outputs: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> anyhow::Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(OutputFile {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    /// Write `<stem>.manifest.json` next to the outputs.
    pub fn finish<P: Serialize>(
        self,
        stem: &str,
        command: &str,
        args: &[String],
        params: &P,
        seed: Option<u64>,
    ) -> anyhow::Result<PathBuf> {
        let manifest = RunManifest {
            command: command.to_string(),
            args: args.to_vec(),
            params: serde_json::to_value(params)?,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.outputs,
            duration_seconds: self.started.elapsed().as_secs_f64(),
        };
        let path = self.dir.join(format!("{stem}.manifest.json"));
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(path)
    }
}

/// Re-run `manifest_path` writing into `out` and check every output checksum.
pub fn replay(manifest_path: &Path, out: &Path, workers: usize) -> anyhow::Result<()> {
    let text = fs::read_to_string(manifest_path)
        .with_context(|| format!("reading {}", manifest_path.display()))?;
    let manifest: RunManifest = serde_json::from_str(&text)?;
    crate::run_args(manifest.args.clone(), out.to_path_buf(), workers)?;
    let mut mismatched = Vec::new();
    for file in &manifest.outputs {
        let path = out.join(&file.path);
        let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        if sha256_hex(&bytes) != file.sha256 {
            mismatched.push(file.path.clone());
        }
    }
    if !mismatched.is_empty() {
        bail!("outputs differ from manifest: {}", mismatched.join(", "));
    }
    println!(
        "replayed {} output(s), all checksums match",
        manifest.outputs.len()
    );
    Ok(())
}
