use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::params::Resolved;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Error,
}

/// Written next to every set of outputs; `lpr replay` re-runs `params`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Absent when the run failed before its parameters were resolved.
    pub params: Option<Resolved>,
    pub seeds: Vec<(String, u64)>,
    /// Relative to the manifest's directory.
    pub outputs: Vec<String>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl RunManifest {
    pub fn new(params: Resolved) -> Self {
        let mut m = Self::unresolved(params.command_name());
        m.seeds = params.seeds();
        m.params = Some(params);
        m
    }

    pub fn unresolved(command: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            params: None,
            seeds: Vec::new(),
            outputs: Vec::new(),
            status: Status::Ok,
            error: None,
        }
    }

    pub fn fail(&mut self, err: &anyhow::Error) {
        self.status = Status::Error;
        self.error = Some(format!("{err:#}"));
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
