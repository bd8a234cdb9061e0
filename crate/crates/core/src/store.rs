//! Content-addressed blob store.
//!
//! Stands in for the distributed file network: blobs live in one flat
//! directory, named by the hex digest of their bytes. Retrieval
//! rehashes the file before returning it, so silent disk corruption is
//! impossible by construction. Blobs are always masked ciphertext;
//! plaintext never touches the store.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::hashing::{sha256, Digest};

/// Environment variable naming the store root directory.
pub const STORE_ROOT_ENV: &str = "DEAM_STORE_ROOT";

const SCHEME_PREFIX: &str = "sha256:";

/// Content identifier: scheme prefix plus the content digest.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cid(pub Digest);

impl Cid {
    pub fn of(content: &[u8]) -> Cid {
        Cid(sha256(&[content]))
    }
}

impl fmt::Display for Cid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{SCHEME_PREFIX}{}", self.0)
    }
}

impl fmt::Debug for Cid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cid({self})")
    }
}

impl FromStr for Cid {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let hex = s
            .strip_prefix(SCHEME_PREFIX)
            .ok_or_else(|| StoreError::BadCid(s.to_string()))?;
        Ok(Cid(
            Digest::from_hex(hex).map_err(|_| StoreError::BadCid(s.to_string()))?
        ))
    }
}

impl Serialize for Cid {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Cid {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("malformed content id {0:?}")]
    BadCid(String),
    #[error("no content stored under {0}")]
    NotFound(Cid),
    #[error("content under {cid} hashes to {actual}, store is corrupt")]
    Integrity { cid: Cid, actual: Digest },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub struct ContentStore {
    root: PathBuf,
}

impl ContentStore {
    /// Open (creating if needed) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        std::fs::create_dir_all(&root)?;
        Ok(ContentStore { root })
    }

    /// Root from the `DEAM_STORE_ROOT` environment variable.
    pub fn open_from_env() -> Result<Option<Self>, StoreError> {
        match std::env::var(STORE_ROOT_ENV) {
            Ok(root) if !root.is_empty() => Ok(Some(Self::open(root)?)),
            _ => Ok(None),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn blob_path(&self, cid: &Cid) -> PathBuf {
        self.root.join(cid.0.to_hex())
    }

    /// Persist content and return its id. Idempotent: identical bytes
    /// land on the identical path, and concurrent puts of the same
    /// content race benignly (temp file + atomic rename).
    pub fn put(&self, content: &[u8]) -> Result<Cid, StoreError> {
        let cid = Cid::of(content);
        let path = self.blob_path(&cid);
        if path.exists() {
            return Ok(cid);
        }
        let tmp = self
            .root
            .join(format!(".tmp-{}-{}", std::process::id(), cid.0.to_hex()));
        std::fs::write(&tmp, content)?;
        std::fs::rename(&tmp, &path)?;
        Ok(cid)
    }

    /// Retrieve content, re-verifying its digest before returning.
    pub fn get(&self, cid: &Cid) -> Result<Vec<u8>, StoreError> {
        let path = self.blob_path(cid);
        let content = match std::fs::read(&path) {
            Ok(c) => c,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound(*cid))
            }
            Err(e) => return Err(e.into()),
        };
        let actual = sha256(&[&content]);
        if actual != cid.0 {
            return Err(StoreError::Integrity { cid: *cid, actual });
        }
        Ok(content)
    }

    pub fn contains(&self, cid: &Cid) -> bool {
        self.blob_path(cid).exists()
    }
}
