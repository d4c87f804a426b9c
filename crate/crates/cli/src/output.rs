use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(&path)
            .map_err(|e| CliError::Output(format!("cannot create {}: {e}", path.display())))?;
        Ok(OutDir(path))
    }

    pub fn path(&self) -> &Path {
        &self.0
    }

    pub fn csv(&self, name: &str) -> Result<csv::Writer<File>, CliError> {
        let file = File::create(self.0.join(name))?;
        Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.text(name, &text)
    }

    pub fn text(&self, name: &str, text: &str) -> Result<(), CliError> {
        File::create(self.0.join(name))?.write_all(text.as_bytes())?;
        Ok(())
    }
}

/// Shortest round-trip decimal form, always with a '.' separator.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
