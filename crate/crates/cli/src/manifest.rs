//! Run manifests: enough to reproduce a run's outputs byte for byte.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config_hash: String,
    seed: Option<u64>,
    config: &'a Value,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn digest(path: &Path, shown: String) -> anyhow::Result<FileDigest> {
    let bytes = std::fs::read(path).with_context(|| format!("{}", path.display()))?;
    Ok(FileDigest {
        path: shown,
        sha256: sha256_hex(&bytes),
    })
}

/// Writes `<command>.manifest.json` into `out_dir`. Outputs are listed by
/// file name so the manifest does not depend on where the run was written.
pub fn write(
    out_dir: &Path,
    command: &str,
    config: &Value,
    seed: Option<u64>,
    inputs: &[PathBuf],
    outputs: &[PathBuf],
) -> anyhow::Result<()> {
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config_hash: sha256_hex(&serde_json::to_vec(config)?),
        seed,
        config,
        inputs: inputs
            .iter()
            .map(|p| digest(p, p.display().to_string()))
            .collect::<anyhow::Result<_>>()?,
        outputs: outputs
            .iter()
            .map(|p| {
                let name = p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned());
                digest(p, name)
            })
            .collect::<anyhow::Result<_>>()?,
    };
    let path = out_dir.join(format!("{command}.manifest.json"));
    let mut body = serde_json::to_vec_pretty(&manifest)?;
    body.push(b'\n');
    std::fs::write(&path, body).with_context(|| format!("{}", path.display()))
}
