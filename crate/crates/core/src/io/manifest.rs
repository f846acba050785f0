//! `manifest.json`: the index a viewer uses to scrub through a frame
//! sequence.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, FormatError, Result};
use crate::io::line_file::DomainInfo;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: u32,
    pub file: String,
    pub time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub frame_count: usize,
    pub domain: DomainInfo,
    pub frames: Vec<ManifestEntry>,
}

/// `frame_000042.qvl` style names.
pub fn frame_file_name(index: u32, extension: &str) -> String {
    format!("frame_{index:06}.{extension}")
}

impl Manifest {
    pub fn new(domain: DomainInfo) -> Self {
        Manifest { frame_count: 0, domain, frames: Vec::new() }
    }

    pub fn push(&mut self, index: u32, file: impl Into<String>, time: f64) {
        self.frames.push(ManifestEntry { index, file: file.into(), time });
        self.frame_count = self.frames.len();
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_count != self.frames.len() {
            return Err(Error::contract(format!(
                "manifest lists {} frames but frame_count is {}",
                self.frames.len(),
                self.frame_count
            )));
        }
        if self.frames.windows(2).any(|w| w[0].index >= w[1].index) {
            return Err(Error::contract("manifest frames must have increasing indices"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(FormatError::from)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        self.validate()?;
        std::fs::write(path, self.to_json()?).map_err(|e| Error::Format(FormatError::Io(e)))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Format(FormatError::from(e)))?;
        let m: Manifest = serde_json::from_str(&text).map_err(FormatError::from)?;
        m.validate()?;
        Ok(m)
    }
}
