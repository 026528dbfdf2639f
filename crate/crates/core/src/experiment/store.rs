//! Per-cell persistence. Every artifact is written to a temporary sibling and
//! renamed into place, so a killed run never leaves a truncated cell behind.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::select::StrategyKind;

#[derive(Debug, Serialize, Deserialize)]
struct Stamped<T> {
    config_hash: String,
    value: T,
}

#[derive(Debug, Clone)]
pub(crate) struct Store {
    root: PathBuf,
    config_hash: String,
}

impl Store {
    pub(crate) fn open(root: &Path, config_hash: &str) -> Result<Self> {
        for sub in ["selections", "cells"] {
            let dir = root.join(sub);
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        Ok(Store {
            root: root.to_path_buf(),
            config_hash: config_hash.to_string(),
        })
    }

    pub(crate) fn selection_path(&self, kind: StrategyKind, index: usize) -> PathBuf {
        self.root
            .join("selections")
            .join(format!("{}-{index}.json", kind.as_str()))
    }

    pub(crate) fn cell_path(&self, kind: StrategyKind, seed_index: usize) -> PathBuf {
        self.root
            .join("cells")
            .join(format!("{}-seed{seed_index:03}.json", kind.as_str()))
    }

    /// The stored value, if present and written under the same config hash.
    pub(crate) fn load<T: DeserializeOwned>(&self, path: &Path) -> Option<T> {
        let text = fs::read_to_string(path).ok()?;
        match serde_json::from_str::<Stamped<T>>(&text) {
            Ok(s) if s.config_hash == self.config_hash => Some(s.value),
            Ok(_) => {
                log::info!("{} belongs to another config, recomputing", path.display());
                None
            }
            Err(e) => {
                log::warn!("ignoring unreadable {}: {e}", path.display());
                None
            }
        }
    }

    pub(crate) fn save<T: Serialize>(&self, path: &Path, value: &T) -> Result<()> {
        let stamped = Stamped {
            config_hash: self.config_hash.clone(),
            value,
        };
        write_atomic(path, serde_json::to_string_pretty(&stamped)?.as_bytes())
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_checks_the_hash() {
        let dir = tempfile::tempdir().unwrap();
        let a = Store::open(dir.path(), "aaa").unwrap();
        let b = Store::open(dir.path(), "bbb").unwrap();
        let path = a.cell_path(StrategyKind::ImRa, 4);
        assert!(path.ends_with("cells/im-ra-seed004.json"));
        assert_eq!(a.load::<Vec<u32>>(&path), None);
        a.save(&path, &vec![1u32, 2]).unwrap();
        assert_eq!(a.load::<Vec<u32>>(&path), Some(vec![1, 2]));
        assert_eq!(b.load::<Vec<u32>>(&path), None);
        assert!(!path.with_extension("json.tmp").exists());
    }
}
