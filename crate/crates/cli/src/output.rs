//! Number formatting, digests and run manifests.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Fixed-point decimal with `digits` significant digits; `inf` for `+∞`.
pub fn sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = digits as i64 - 1 - magnitude;
    if decimals >= 0 {
        format!("{:.*}", decimals as usize, x)
    } else {
        // more integer digits than requested: round, then print in full
        let scale = 10f64.powi((-decimals) as i32);
        format!("{:.0}", (x / scale).round() * scale)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub params: Value,
    pub seeds: Vec<u64>,
    pub version: &'static str,
    pub timestamp_unix: u64,
    pub outputs: Vec<OutputDigest>,
}

/// `<file>.manifest.json` next to the data file.
pub fn manifest_path(data: &Path) -> PathBuf {
    let mut name = data.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    data.with_file_name(name)
}

/// Writes `contents` to `path` and a sidecar manifest describing the run.
pub fn write_with_manifest(path: &Path, contents: &[u8], params: Value, seeds: Vec<u64>) -> io::Result<()> {
    fs::write(path, contents)?;
    let manifest = RunManifest {
        command: std::env::args().collect(),
        params,
        seeds,
        version: env!("CARGO_PKG_VERSION"),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        outputs: vec![OutputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(contents),
        }],
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
    fs::write(manifest_path(path), json + "\n")
}
