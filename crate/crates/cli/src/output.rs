use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Output files are staged in memory and written together, so a command
/// that fails leaves nothing behind.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, contents: Vec<u8>) {
        self.files.push((name.to_string(), contents));
    }

    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut written = Vec::new();
        for (name, contents) in &self.files {
            let path = dir.join(name);
            if let Err(e) = fs::write(&path, contents) {
                for p in written.iter().chain(std::iter::once(&path)) {
                    let _ = fs::remove_file(p);
                }
                return Err(e).with_context(|| format!("writing {}", path.display()));
            }
            written.push(path);
        }
        for p in &written {
            log::info!("wrote {}", p.display());
        }
        Ok(written)
    }
}
