use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::IngestError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleEntry {
    pub id: String,
    pub title: String,
    /// PDF file name relative to the example directory.
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleInfo {
    pub id: String,
    pub title: String,
}

#[derive(Debug, Error)]
pub enum ExampleError {
    #[error("reading example manifest {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("example manifest {path} is malformed: {message}")]
    Malformed { path: String, message: String },
    #[error("example manifest defines {0:?} more than once")]
    DuplicateId(String),
    #[error("example {id:?} points at missing file {file}")]
    MissingFile { id: String, file: String },
}

/// Pre-loaded example papers, validated when the registry is loaded.
#[derive(Debug, Clone, Default)]
pub struct ExampleRegistry {
    dir: PathBuf,
    entries: Vec<ExampleEntry>,
}

impl ExampleRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Loads `dir/manifest.json`. A directory without a manifest holds no
    /// examples.
    pub fn load(dir: &Path) -> Result<Self, ExampleError> {
        let path = dir.join(MANIFEST_FILE);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Ok(ExampleRegistry {
                    dir: dir.to_owned(),
                    entries: Vec::new(),
                })
            }
            Err(source) => {
                return Err(ExampleError::Io {
                    path: path.display().to_string(),
                    source,
                })
            }
        };
        let mut entries: Vec<ExampleEntry> =
            serde_json::from_str(&text).map_err(|e| ExampleError::Malformed {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        let mut seen = HashSet::new();
        for entry in &entries {
            if !seen.insert(entry.id.as_str()) {
                return Err(ExampleError::DuplicateId(entry.id.clone()));
            }
            if !dir.join(&entry.file).is_file() {
                return Err(ExampleError::MissingFile {
                    id: entry.id.clone(),
                    file: entry.file.clone(),
                });
            }
        }
        entries.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(ExampleRegistry {
            dir: dir.to_owned(),
            entries,
        })
    }

    pub fn list(&self) -> Vec<ExampleInfo> {
        self.entries
            .iter()
            .map(|e| ExampleInfo {
                id: e.id.clone(),
                title: e.title.clone(),
            })
            .collect()
    }

    pub fn get(&self, id: &str) -> Option<&ExampleEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn pdf_bytes(&self, id: &str) -> Result<Vec<u8>, IngestError> {
        let entry = self
            .get(id)
            .ok_or_else(|| IngestError::UnknownExample(id.to_owned()))?;
        std::fs::read(self.dir.join(&entry.file)).map_err(|source| IngestError::ExampleIo {
            id: id.to_owned(),
            source,
        })
    }
}
