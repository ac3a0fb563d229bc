//! On-disk checkpoints for resumable ensembles.
//!
//! Two kinds of file live under the checkpoint root, both JSON:
//!
//! * `initial/<key>/stream-<s>-sample-<k>.json`: an equilibrated initial
//!   condition (full [`SystemState`] plus the position of its random stream).
//!   `<key>` fingerprints everything the sampler depends on, so different
//!   experiments drawing the same members share these files.
//! * `progress/<key>.json`: the folded results of the members finished so far,
//!   keyed by a fingerprint of the complete manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::SystemState;
use crate::sampler::RngStreamState;

/// An equilibrated ensemble member before integration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub stream: u64,
    /// Position within the stream's chain (always 0 for independent chains).
    pub index: usize,
    pub state: SystemState,
    /// Stream position right after this state was emitted.
    pub rng: RngStreamState,
}

/// Accumulated results of members `0..next_member`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Progress<A> {
    pub manifest: String,
    pub next_member: usize,
    pub accumulator: A,
}

/// Short hex digest identifying `text`.
pub fn fingerprint(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(12).map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug)]
pub struct CheckpointStore {
    root: PathBuf,
}

impl CheckpointStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(CheckpointStore { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn initial_path(&self, key: &str, stream: u64, index: usize) -> PathBuf {
        self.root.join("initial").join(key).join(format!("stream-{stream}-sample-{index}.json"))
    }

    fn progress_path(&self, key: &str) -> PathBuf {
        self.root.join("progress").join(format!("{key}.json"))
    }

    pub fn load_initial(&self, key: &str, stream: u64, index: usize) -> Result<Option<InitialCondition>> {
        let Some(ic) = read_json::<InitialCondition>(&self.initial_path(key, stream, index))? else {
            return Ok(None);
        };
        if ic.stream != stream || ic.index != index {
            return Err(Error::Parse(format!("checkpoint for stream {stream} sample {index} holds another member")));
        }
        Ok(Some(ic))
    }

    pub fn save_initial(&self, key: &str, ic: &InitialCondition) -> Result<()> {
        write_json(&self.initial_path(key, ic.stream, ic.index), ic)
    }

    /// Loads progress saved under `key`, provided it was written for `manifest`.
    pub fn load_progress<A: DeserializeOwned>(&self, key: &str, manifest: &str) -> Result<Option<Progress<A>>> {
        match read_json::<Progress<A>>(&self.progress_path(key))? {
            Some(p) if p.manifest == manifest => Ok(Some(p)),
            Some(_) => Err(Error::Parse(format!("progress checkpoint {key} belongs to a different manifest"))),
            None => Ok(None),
        }
    }

    pub fn save_progress<A: Serialize>(&self, key: &str, progress: &Progress<A>) -> Result<()> {
        write_json(&self.progress_path(key), progress)
    }

    pub fn clear_progress(&self, key: &str) -> Result<()> {
        match fs::remove_file(self.progress_path(key)) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(e.into()),
            _ => Ok(()),
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Option<T>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    serde_json::from_str(&text).map(Some).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file so an interrupted run never leaves a
/// truncated checkpoint behind.
fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let text = serde_json::to_string(value).map_err(|e| Error::Parse(format!("cannot serialize checkpoint: {e}")))?;
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
