//! Provenance records. Everything except the timestamp sidecar is
//! deterministic so reruns produce identical bytes.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub fn sha256_file(path: &Path) -> io::Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

/// Files under `path` (or `path` itself), sorted.
fn files(path: &Path) -> io::Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut out = Vec::new();
    if path.is_dir() {
        for e in fs::read_dir(path)? {
            out.extend(files(&e?.path())?);
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Serialize)]
struct Record<'a> {
    command: &'a str,
    version: &'a str,
    config_sha256: String,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

pub struct Provenance {
    command: &'static str,
    started: SystemTime,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

fn unix(t: SystemTime) -> f64 {
    t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl Provenance {
    pub fn start(command: &'static str) -> Self {
        Provenance { command, started: SystemTime::now(), inputs: Vec::new(), outputs: Vec::new() }
    }

    pub fn input(&mut self, p: impl Into<PathBuf>) {
        self.inputs.push(p.into());
    }

    pub fn output(&mut self, p: impl Into<PathBuf>) {
        self.outputs.push(p.into());
    }

    /// Writes `provenance/<command>.json` and the timestamp sidecar.
    pub fn finish(self, out: &Path, config_text: &str) -> io::Result<()> {
        let rel = |p: &Path| p.strip_prefix(out).unwrap_or(p).display().to_string();
        let hash_all = |paths: &[PathBuf]| -> io::Result<BTreeMap<String, String>> {
            let mut m = BTreeMap::new();
            for p in paths {
                for f in files(p)? {
                    m.insert(rel(&f), sha256_file(&f)?);
                }
            }
            Ok(m)
        };
        let record = Record {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: hex::encode(Sha256::digest(config_text.as_bytes())),
            inputs: hash_all(&self.inputs)?,
            outputs: hash_all(&self.outputs)?,
        };
        let dir = out.join("provenance");
        fs::create_dir_all(&dir)?;
        fs::write(dir.join(format!("{}.json", self.command)), serde_json::to_string_pretty(&record)? + "\n")?;
        let stamps = serde_json::json!({ "started_unix": unix(self.started), "finished_unix": unix(SystemTime::now()) });
        fs::write(dir.join(format!("{}.timestamps.json", self.command)), stamps.to_string() + "\n")?;
        Ok(())
    }
}
