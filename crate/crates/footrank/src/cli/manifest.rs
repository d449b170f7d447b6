//! Run manifests and the content-addressed run directory.
//!
//! Every command writes a `manifest.json` echoing its fully resolved
//! configuration; the run directory name is a hash of that content, so
//! identical configurations land in identical directories and reruns are
//! byte-for-byte reproducible.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::Result;

/// 64-bit FNV-1a over the canonical manifest text.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

pub struct RunDir {
    pub path: PathBuf,
    pub manifest: Value,
}

/// Assemble the manifest for a command, create `<out>/<command>-<hash>/`,
/// and write `manifest.json` inside it.
pub fn create_run_dir(out: &Path, command: &str, config: Value) -> Result<RunDir> {
    let manifest = json!({
        "tool": format!("footrank {}", env!("CARGO_PKG_VERSION")),
        "command": command,
        "config": config,
    });
    let canonical = serde_json::to_string_pretty(&manifest)?;
    let dir = out.join(format!("{command}-{:016x}", fnv1a(canonical.as_bytes())));
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("manifest.json"), canonical.as_bytes())?;
    Ok(RunDir {
        path: dir,
        manifest,
    })
}

impl RunDir {
    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    pub fn write_json(&self, name: &str, value: &Value) -> Result<()> {
        fs::write(self.file(name), serde_json::to_string_pretty(value)?)?;
        Ok(())
    }
}
