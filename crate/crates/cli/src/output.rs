use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use tempfile::NamedTempFile;

/// Output directory whose files are written atomically.
pub struct OutDir {
    path: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(path: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))?;
        Ok(Self { path: path.to_path_buf(), written: Vec::new() })
    }

    /// Writes to a temporary file in the same directory, then renames.
    pub fn write(&mut self, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
        let target = self.path.join(name);
        let mut tmp = NamedTempFile::new_in(&self.path)
            .with_context(|| format!("creating a temporary file in {}", self.path.display()))?;
        tmp.write_all(contents.as_bytes())?;
        tmp.flush()?;
        tmp.persist(&target)
            .with_context(|| format!("writing {}", target.display()))?;
        self.written.push(target.clone());
        Ok(target)
    }

    pub fn write_json(&mut self, name: &str, value: &serde_json::Value) -> anyhow::Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
