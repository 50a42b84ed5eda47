//! Atomic output files and their run manifests.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::cli::Command;
use crate::error::{AppError, Result};

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to reproduce one output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Command name plus its fully resolved parameters.
    #[serde(flatten)]
    pub command: Command,
    /// Per-stage seeds fanned out from `--seed`.
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<InputDigest>,
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: PathBuf,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(role: &str, path: &Path) -> Result<Self> {
        Ok(InputDigest { role: role.to_string(), path: path.to_path_buf(), sha256: sha256_file(path)? })
    }

    /// Fails when the file no longer hashes to the recorded digest.
    pub fn verify(&self) -> Result<()> {
        let found = sha256_file(&self.path)?;
        if found != self.sha256 {
            return Err(AppError::DigestMismatch { path: self.path.clone(), expected: self.sha256.clone(), found });
        }
        Ok(())
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(|e| AppError::io(path, e))?;
    let mut hasher = Sha256::new();
    io::copy(&mut file, &mut hasher).map_err(|e| AppError::io(path, e))?;
    Ok(hex::encode(hasher.finalize()))
}

/// `<out>.manifest.json`
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| AppError::io(path, e))?;
        serde_json::from_reader(io::BufReader::new(file))
            .map_err(|source| AppError::Manifest { path: path.to_path_buf(), source })
    }
}

/// Writes through a temporary file in the destination directory and renames
/// it into place, so a failed write never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = NamedTempFile::new_in(dir).map_err(|e| AppError::io(dir, e))?;
    let mut w = BufWriter::new(tmp);
    w.write_all(bytes).map_err(|e| AppError::io(path, e))?;
    let tmp = w.into_inner().map_err(|e| AppError::io(path, e.into_error()))?;
    tmp.as_file().sync_all().map_err(|e| AppError::io(path, e))?;
    tmp.persist(path).map_err(|e| AppError::io(path, e.error))?;
    Ok(())
}

/// Writes the output, then its manifest; the output is removed again if the
/// manifest cannot be written.
pub fn commit(manifest: &RunManifest, bytes: &[u8]) -> Result<()> {
    let json = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    write_atomic(&manifest.output, bytes)?;
    if let Err(e) = write_atomic(&manifest_path(&manifest.output), &json) {
        let _ = std::fs::remove_file(&manifest.output);
        return Err(e);
    }
    Ok(())
}
