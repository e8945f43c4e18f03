//! On-disk response store shared by caching and offline replay.
//!
//! One file per request, JSON, human-readable so fixtures can be
//! written by hand. The file name is a sanitized slice of the request
//! key plus a short SHA-256 digest of the exact key, which keeps names
//! filesystem-safe while distinct keys never collide.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Canonical request identity: `METHOD <url>`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RequestKey {
    pub method: &'static str,
    pub url: String,
}

impl RequestKey {
    pub fn get(url: impl Into<String>) -> RequestKey {
        RequestKey {
            method: "GET",
            url: url.into(),
        }
    }

    pub fn canonical(&self) -> String {
        format!("{} {}", self.method, self.url)
    }

    /// File name this key is stored under.
    pub fn file_name(&self) -> String {
        let canonical = self.canonical();
        let digest = Sha256::digest(canonical.as_bytes());
        let hash: String = digest[..6].iter().map(|b| format!("{b:02x}")).collect();
        let mut slug: String = canonical
            .chars()
            .map(|c| match c {
                'a'..='z' | '0'..='9' | '.' | '-' => c,
                'A'..='Z' => c.to_ascii_lowercase(),
                _ => '_',
            })
            .collect();
        slug.truncate(96);
        format!("{slug}-{hash}.json")
    }
}

impl std::fmt::Display for RequestKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// A stored HTTP response: status, the headers that matter for replay,
/// and the body as text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredResponse {
    pub status: u16,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub headers: BTreeMap<String, String>,
    pub body: String,
    /// Recording time; absent in hand-authored fixtures and never part
    /// of dataset outputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fetched_at: Option<String>,
}

impl StoredResponse {
    pub fn ok(body: impl Into<String>) -> StoredResponse {
        StoredResponse {
            status: 200,
            headers: BTreeMap::new(),
            body: body.into(),
            fetched_at: None,
        }
    }

    pub fn status(status: u16) -> StoredResponse {
        StoredResponse {
            status,
            headers: BTreeMap::new(),
            body: String::new(),
            fetched_at: None,
        }
    }

    pub fn redirect(status: u16, location: impl Into<String>) -> StoredResponse {
        StoredResponse {
            status,
            headers: BTreeMap::from([("location".to_string(), location.into())]),
            body: String::new(),
            fetched_at: None,
        }
    }

    pub fn location(&self) -> Option<&str> {
        self.headers.get("location").map(String::as_str)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct FixtureFile {
    key: String,
    #[serde(flatten)]
    response: StoredResponse,
}

/// Directory of stored responses keyed by [`RequestKey`].
#[derive(Debug)]
pub struct FixtureStore {
    dir: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("cache io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cache entry {path} is not valid fixture JSON: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error("cache entry {path} holds key {found:?}, expected {expected:?}")]
    KeyMismatch {
        path: PathBuf,
        found: String,
        expected: String,
    },
}

impl FixtureStore {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<FixtureStore> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(FixtureStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &RequestKey) -> PathBuf {
        self.dir.join(key.file_name())
    }

    pub fn lookup(&self, key: &RequestKey) -> Result<Option<StoredResponse>, StoreError> {
        let path = self.path_for(key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(StoreError::Io { path, source: e }),
        };
        let file: FixtureFile = serde_json::from_str(&text).map_err(|e| StoreError::Corrupt {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let expected = key.canonical();
        if file.key != expected {
            return Err(StoreError::KeyMismatch {
                path,
                found: file.key,
                expected,
            });
        }
        Ok(Some(file.response))
    }

    /// Stores a response atomically: write a temp file, then rename.
    pub fn store(&self, key: &RequestKey, response: &StoredResponse) -> Result<(), StoreError> {
        let path = self.path_for(key);
        let file = FixtureFile {
            key: key.canonical(),
            response: response.clone(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("fixture serializes");
        text.push('\n');
        let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
        fs::write(&tmp, text).map_err(|e| StoreError::Io {
            path: tmp.clone(),
            source: e,
        })?;
        fs::rename(&tmp, &path).map_err(|e| StoreError::Io { path, source: e })
    }
}
