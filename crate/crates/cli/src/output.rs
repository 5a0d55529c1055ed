use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

/// Files a command produces, held in memory until every computation has succeeded.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_text(&mut self, name: &str, text: String) {
        self.add(name, text.into_bytes());
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    /// Writes into `dir`, creating it if needed. Existing files are only
    /// replaced with `force`; the check runs before anything is written.
    pub fn commit(self, dir: &Path, force: bool) -> anyhow::Result<Vec<PathBuf>> {
        let paths: Vec<PathBuf> = self.files.iter().map(|(n, _)| dir.join(n)).collect();
        if !force {
            if let Some(p) = paths.iter().find(|p| p.exists()) {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::AlreadyExists,
                    format!("{} exists; pass --force to overwrite", p.display()),
                )
                .into());
            }
        }
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        for ((_, bytes), path) in self.files.iter().zip(&paths) {
            fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(paths)
    }
}
