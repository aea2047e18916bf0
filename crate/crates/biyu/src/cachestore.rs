//! File-backed exchange cache: an append-only directory with one JSON
//! file per digest (hex filename) plus an advisory index file.
//!
//! The directory listing is the source of truth; `index.txt` is a
//! convenience for humans and diff tools and is rebuilt by `verify`.
//! Entry files never change once written; rewriting identical content is
//! a no-op and conflicting content is an error.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use biyu_core::gateway::{cache_key, CacheEntry, CacheStore, RequestDigest, StoreError};

use crate::error::{Error, Result};

pub const INDEX_FILE: &str = "index.txt";

#[derive(Debug)]
pub struct FileCacheStore {
    dir: PathBuf,
    // Writes are serialized; reads go straight to the filesystem.
    write_lock: Mutex<()>,
}

impl FileCacheStore {
    /// Opens (creating if needed) a cache directory.
    pub fn open(dir: &Path) -> Result<FileCacheStore> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(FileCacheStore {
            dir: dir.to_path_buf(),
            write_lock: Mutex::new(()),
        })
    }

    /// Opens an existing cache directory; replay requires one.
    pub fn open_existing(dir: &Path) -> Result<FileCacheStore> {
        if !dir.is_dir() {
            return Err(Error::Cache(format!(
                "cache directory {} does not exist",
                dir.display()
            )));
        }
        Ok(FileCacheStore {
            dir: dir.to_path_buf(),
            write_lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry_path(&self, digest: &RequestDigest) -> PathBuf {
        self.dir.join(format!("{}.json", digest.to_hex()))
    }

    fn read_entry(&self, path: &Path) -> Result<CacheEntry> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))
    }

    fn append_index(&self, digest: &RequestDigest) -> std::io::Result<()> {
        use std::io::Write;
        let mut f = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.dir.join(INDEX_FILE))?;
        writeln!(f, "{}", digest.to_hex())
    }

    /// Recomputes every entry's digest and checks it against both the
    /// stored digest and the filename; rebuilds the index file. Returns
    /// the corrupt entries found.
    pub fn verify(&self) -> Result<Vec<(String, String)>> {
        let mut corrupt = Vec::new();
        let mut good = Vec::new();
        for digest in CacheStore::digests(self) {
            let path = self.entry_path(&digest);
            match self.read_entry(&path) {
                Ok(entry) => {
                    let recomputed = cache_key(&entry.request);
                    if entry.digest != digest {
                        corrupt.push((
                            digest.to_hex(),
                            "stored digest differs from filename".to_string(),
                        ));
                    } else if recomputed != digest {
                        corrupt.push((
                            digest.to_hex(),
                            format!("request hashes to {recomputed}"),
                        ));
                    } else {
                        good.push(digest.to_hex());
                    }
                }
                Err(e) => corrupt.push((digest.to_hex(), e.to_string())),
            }
        }
        good.sort_unstable();
        let index: String = good.iter().map(|h| format!("{h}\n")).collect();
        let index_path = self.dir.join(INDEX_FILE);
        fs::write(&index_path, index).map_err(|e| Error::io(&index_path, e))?;
        Ok(corrupt)
    }

    /// Bundles every entry into a single JSON-lines archive, sorted by
    /// digest.
    pub fn export(&self, archive: &Path) -> Result<usize> {
        let mut digests = CacheStore::digests(self);
        digests.sort_unstable();
        let mut out = String::new();
        for digest in &digests {
            let entry = self.read_entry(&self.entry_path(digest))?;
            out.push_str(&serde_json::to_string(&entry).expect("entry serializes"));
            out.push('\n');
        }
        fs::write(archive, out).map_err(|e| Error::io(archive, e))?;
        Ok(digests.len())
    }

    /// Imports entries from an archive, verifying each digest.
    pub fn import(&self, archive: &Path) -> Result<usize> {
        let text = fs::read_to_string(archive).map_err(|e| Error::io(archive, e))?;
        let mut count = 0;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: CacheEntry = serde_json::from_str(line).map_err(|e| Error::Parse {
                path: archive.display().to_string(),
                line: i + 1,
                reason: e.to_string(),
            })?;
            if !entry.verify() {
                return Err(Error::CorruptEntry {
                    digest: entry.digest.to_hex(),
                    reason: "archived digest does not match request".to_string(),
                });
            }
            self.put(entry)
                .map_err(|e| Error::Cache(e.to_string()))?;
            count += 1;
        }
        Ok(count)
    }
}

fn now_epoch_seconds() -> String {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_else(|_| "0".to_string())
}

impl CacheStore for FileCacheStore {
    fn get(&self, digest: &RequestDigest) -> Option<CacheEntry> {
        let path = self.entry_path(digest);
        self.read_entry(&path).ok()
    }

    fn put(&self, mut entry: CacheEntry) -> std::result::Result<(), StoreError> {
        let _guard = self.write_lock.lock().expect("cache write lock poisoned");
        let path = self.entry_path(&entry.digest);
        if path.exists() {
            let existing = self
                .read_entry(&path)
                .map_err(|e| StoreError::Backend(e.to_string()))?;
            if existing.raw_text == entry.raw_text && existing.request == entry.request {
                return Ok(());
            }
            return Err(StoreError::Conflict(entry.digest));
        }
        if entry.created_at.is_none() {
            entry.created_at = Some(now_epoch_seconds());
        }
        let json = serde_json::to_string_pretty(&entry)
            .map_err(|e| StoreError::Backend(e.to_string()))?;
        fs::write(&path, json).map_err(|e| StoreError::Backend(e.to_string()))?;
        let _ = self.append_index(&entry.digest);
        Ok(())
    }

    fn digests(&self) -> Vec<RequestDigest> {
        let mut out = Vec::new();
        let Ok(entries) = fs::read_dir(&self.dir) else {
            return out;
        };
        for entry in entries.flatten() {
            let name = entry.file_name();
            let Some(name) = name.to_str() else { continue };
            if let Some(hex) = name.strip_suffix(".json") {
                if let Some(digest) = RequestDigest::from_hex(hex) {
                    out.push(digest);
                }
            }
        }
        out.sort_unstable();
        out
    }
}
