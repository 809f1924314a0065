//! Deterministic train/held-out split shared by textures and glyphs.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!(
                "unknown split {other:?}, expected train or test"
            ))),
        }
    }
}

/// Marks `holdout_count` of `n` items as test using a seeded shuffle of `0..n`.
///
/// Items are identified by position in the caller's (sorted) list.
pub fn assign_split(n: usize, holdout_count: usize, split_seed: u64) -> Vec<Split> {
    assert!(holdout_count <= n);
    let mut rng = RngStream::derive(split_seed, 0);
    let order = rng.permutation(n);
    let mut out = vec![Split::Train; n];
    for &i in &order[..holdout_count] {
        out[i] = Split::Test;
    }
    out
}

/// JSON export of a split: `{"split_seed", "holdout_count", "test_ids", "files"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub split_seed: u64,
    pub holdout_count: usize,
    pub test_ids: Vec<usize>,
    pub files: Vec<String>,
}

impl SplitManifest {
    pub fn new(split_seed: u64, splits: &[Split], files: Vec<String>) -> Self {
        let test_ids: Vec<usize> = splits
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Split::Test)
            .map(|(i, _)| i)
            .collect();
        Self {
            split_seed,
            holdout_count: test_ids.len(),
            test_ids,
            files,
        }
    }
}

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// Image files directly inside `dir`, sorted by file name.
pub(crate) fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::MissingDirectory(dir.to_path_buf()));
    }
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if path.is_file() && is_image {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

pub(crate) fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holdout_count_is_exact() {
        let s = assign_split(5640, 100, 0);
        assert_eq!(s.iter().filter(|&&x| x == Split::Test).count(), 100);
        assert_eq!(s.iter().filter(|&&x| x == Split::Train).count(), 5540);
    }

    #[test]
    fn split_is_pure() {
        assert_eq!(assign_split(964, 100, 7), assign_split(964, 100, 7));
        assert_ne!(assign_split(964, 100, 7), assign_split(964, 100, 8));
        assert!(assign_split(3, 0, 1).iter().all(|&s| s == Split::Train));
    }
}
