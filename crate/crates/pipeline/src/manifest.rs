//! Run manifest: hashes of the configuration, inputs and outputs.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{PipelineError, Result};
use crate::run::RunReport;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = std::fs::File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| PipelineError::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Writes a flat JSON object. Paths are recorded by file name only and the
/// worker count is left out, so equivalent runs produce identical manifests.
pub fn write_manifest(path: &Path, cfg: &RunConfig, report: &RunReport) -> Result<()> {
    let mut m: BTreeMap<String, String> = BTreeMap::new();
    m.insert("tool_version".into(), env!("CARGO_PKG_VERSION").into());
    m.insert("config_sha256".into(), sha256_hex(cfg.canonical().as_bytes()));
    for (role, input) in [("mortality", &cfg.mortality), ("e0", &cfg.e0), ("tfr", &cfg.tfr), ("pasfr", &cfg.pasfr)] {
        m.insert(format!("input.{role}.file"), file_name(input));
        m.insert(format!("input.{role}.sha256"), sha256_file(input)?);
    }
    m.insert("countries.completed".into(), report.completed.join(","));
    m.insert(
        "countries.failed".into(),
        report.failed.iter().map(|(c, _)| c.as_str()).collect::<Vec<_>>().join(","),
    );
    for output in &report.outputs {
        m.insert(format!("output.{}.sha256", file_name(output)), sha256_file(output)?);
    }
    let mut text = serde_json::to_string_pretty(&m)
        .map_err(|e| PipelineError::Config(format!("cannot serialize manifest: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
