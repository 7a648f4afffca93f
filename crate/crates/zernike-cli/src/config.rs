//! Deterministic output plumbing: atomic writes and config echoes.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::CliResult;

/// Writes `bytes` to `path` atomically (temp file in the same directory,
/// then rename), so interrupted runs leave no partial outputs.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp: PathBuf = {
        let mut name = path
            .file_name()
            .map(|n| n.to_os_string())
            .unwrap_or_else(|| "out".into());
        name.push(".tmp");
        match dir {
            Some(d) => d.join(name),
            None => PathBuf::from(name),
        }
    };
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Canonical flag echo with a content hash; written as `<name>.config.json`
/// next to every produced output. `pairs` must already be in a fixed order.
pub fn write_config_echo(base: &Path, command: &str, pairs: &[(&str, String)]) -> CliResult<()> {
    let mut canonical = format!("command={command}");
    for (k, v) in pairs {
        canonical.push_str(&format!(";{k}={v}"));
    }
    let digest = Sha256::digest(canonical.as_bytes());
    let hash: String = digest.iter().map(|b| format!("{b:02x}")).collect();

    let mut body = String::from("{\n");
    body.push_str(&format!("  \"command\": \"{command}\",\n"));
    for (k, v) in pairs {
        body.push_str(&format!("  \"{k}\": \"{v}\",\n"));
    }
    body.push_str(&format!("  \"config_hash\": \"sha256:{hash}\"\n}}\n"));

    let mut name = base
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_else(|| "out".into());
    name.push(".config.json");
    let path = match base.parent().filter(|p| !p.as_os_str().is_empty()) {
        Some(d) => d.join(name),
        None => PathBuf::from(name),
    };
    write_atomic(&path, body.as_bytes())
}
