//! File-backed persistence of profiles, explicit marks and visit records.
//!
//! The whole store is one JSON document. Every mutation writes a complete
//! new copy to a sibling temporary file, syncs it, and renames it over the
//! old one, so a crash at any point leaves either the old or the new state
//! on disk. Mutations are serialized by a writer lock; readers work on an
//! immutable snapshot and never wait for disk I/O.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use crate::anchor::{clamp_prefix, clamp_suffix, ExplicitMark, NewMark};
use crate::error::StoreError;
use crate::profile::Profile;
use crate::time::{self, Timestamp};
use crate::url::NormalizedUrl;

pub const STORE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Visit {
    #[serde(rename = "user")]
    pub user_id: String,
    pub url: NormalizedUrl,
    #[serde(with = "time")]
    pub first_seen_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreFile {
    pub version: u32,
    pub profiles: Vec<Profile>,
    pub marks: Vec<ExplicitMark>,
    pub visits: Vec<Visit>,
}

impl Default for StoreFile {
    fn default() -> Self {
        StoreFile { version: STORE_VERSION, profiles: Vec::new(), marks: Vec::new(), visits: Vec::new() }
    }
}

impl StoreFile {
    pub fn from_slice(bytes: &[u8], path: &Path) -> Result<Self, StoreError> {
        let file: StoreFile = serde_json::from_slice(bytes)
            .map_err(|source| StoreError::Corrupt { path: path.display().to_string(), source })?;
        if file.version != STORE_VERSION {
            return Err(StoreError::UnsupportedVersion(file.version));
        }
        Ok(file)
    }

    pub fn to_vec(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("store records always serialize")
    }

    fn next_mark_id(&self) -> String {
        let max = self
            .marks
            .iter()
            .filter_map(|m| m.mark_id.strip_prefix("m-")?.parse::<u64>().ok())
            .max()
            .unwrap_or(0);
        format!("m-{:06}", max + 1)
    }
}

/// Where a simulated crash interrupts a write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrashPoint {
    /// New state fully written to the temporary file, not yet renamed.
    BeforeRename,
    /// Rename done, the mutating call has not returned yet.
    AfterRename,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrashAction {
    /// Abort the process on the spot.
    Abort,
    /// Return an I/O error from the mutating call.
    Fail,
}

#[derive(Debug)]
pub struct Store {
    path: PathBuf,
    snapshot: RwLock<Arc<StoreFile>>,
    writer: Mutex<()>,
    crash: Mutex<Option<(CrashPoint, CrashAction)>>,
}

impl Store {
    /// Opens the store at `path`. A missing file is an empty store; nothing
    /// is written until the first mutation.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let path = path.into();
        let state = match fs::read(&path) {
            Ok(bytes) => StoreFile::from_slice(&bytes, &path)?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => StoreFile::default(),
            Err(e) => return Err(e.into()),
        };
        let tmp = temp_path(&path);
        if tmp.exists() {
            log::warn!("discarding interrupted store write {}", tmp.display());
            let _ = fs::remove_file(&tmp);
        }
        Ok(Store {
            path,
            snapshot: RwLock::new(Arc::new(state)),
            writer: Mutex::new(()),
            crash: Mutex::new(None),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn snapshot(&self) -> Arc<StoreFile> {
        self.snapshot.read().expect("store lock poisoned").clone()
    }

    /// Arms a simulated crash for the next write. Test hook.
    #[doc(hidden)]
    pub fn set_crash_point(&self, point: Option<(CrashPoint, CrashAction)>) {
        *self.crash.lock().expect("store lock poisoned") = point;
    }

    pub fn put_profile<I, S>(&self, user_id: &str, keywords: I) -> Result<Profile, StoreError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let profile = Profile::new(user_id, keywords);
        let stored = profile.clone();
        self.mutate(|state| {
            match state.profiles.iter_mut().find(|p| p.user_id == user_id) {
                Some(existing) => *existing = stored,
                None => state.profiles.push(stored),
            }
            Ok(Some(()))
        })?;
        Ok(profile)
    }

    pub fn profile(&self, user_id: &str) -> Option<Profile> {
        self.snapshot().profiles.iter().find(|p| p.user_id == user_id).cloned()
    }

    pub fn add_mark(&self, mark: NewMark) -> Result<ExplicitMark, StoreError> {
        if mark.quote.is_empty() {
            return Err(StoreError::EmptyQuote);
        }
        self.mutate(|state| {
            let stored = ExplicitMark {
                mark_id: state.next_mark_id(),
                user_id: mark.user_id,
                url: mark.url,
                prefix: clamp_prefix(&mark.prefix).to_string(),
                suffix: clamp_suffix(&mark.suffix).to_string(),
                quote: mark.quote,
                created_at: time::now(),
            };
            state.marks.push(stored.clone());
            Ok(Some(stored))
        })
        .map(|m| m.expect("add_mark always changes the store"))
    }

    /// Marks of `user_id` on `url`, oldest first.
    pub fn get_marks(&self, user_id: &str, url: &NormalizedUrl) -> Vec<ExplicitMark> {
        let mut marks: Vec<ExplicitMark> = self
            .snapshot()
            .marks
            .iter()
            .filter(|m| m.user_id == user_id && &m.url == url)
            .cloned()
            .collect();
        marks.sort_by_key(|m| m.created_at);
        marks
    }

    pub fn delete_mark(&self, mark_id: &str) -> Result<bool, StoreError> {
        let removed = self.mutate(|state| {
            let before = state.marks.len();
            state.marks.retain(|m| m.mark_id != mark_id);
            Ok((state.marks.len() != before).then_some(()))
        })?;
        Ok(removed.is_some())
    }

    /// Records that `user_id` has seen `url`. Returns false if it already had.
    pub fn record_visit(&self, user_id: &str, url: &NormalizedUrl) -> Result<bool, StoreError> {
        if self.has_visited(user_id, url) {
            return Ok(false);
        }
        let added = self.mutate(|state| {
            if state.visits.iter().any(|v| v.user_id == user_id && &v.url == url) {
                return Ok(None);
            }
            state.visits.push(Visit { user_id: user_id.to_string(), url: url.clone(), first_seen_at: time::now() });
            Ok(Some(()))
        })?;
        Ok(added.is_some())
    }

    pub fn has_visited(&self, user_id: &str, url: &NormalizedUrl) -> bool {
        self.snapshot().visits.iter().any(|v| v.user_id == user_id && &v.url == url)
    }

    /// URLs with a visit record for `user_id`.
    pub fn visited_urls(&self, user_id: &str) -> BTreeSet<NormalizedUrl> {
        self.snapshot().visits.iter().filter(|v| v.user_id == user_id).map(|v| v.url.clone()).collect()
    }

    /// Applies `change` to a copy of the state and persists it. `change`
    /// returns `None` when it left the state untouched.
    fn mutate<T>(
        &self,
        change: impl FnOnce(&mut StoreFile) -> Result<Option<T>, StoreError>,
    ) -> Result<Option<T>, StoreError> {
        let _writer = self.writer.lock().expect("store lock poisoned");
        let mut next = (*self.snapshot()).clone();
        let Some(result) = change(&mut next)? else {
            return Ok(None);
        };
        self.persist(&next)?;
        *self.snapshot.write().expect("store lock poisoned") = Arc::new(next);
        Ok(Some(result))
    }

    fn persist(&self, state: &StoreFile) -> Result<(), StoreError> {
        let crash = *self.crash.lock().expect("store lock poisoned");
        let tmp = temp_path(&self.path);
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        {
            let mut file = File::create(&tmp)?;
            file.write_all(&state.to_vec())?;
            file.sync_all()?;
        }
        trip(crash, CrashPoint::BeforeRename)?;
        fs::rename(&tmp, &self.path)?;
        sync_parent(&self.path);
        trip(crash, CrashPoint::AfterRename)?;
        Ok(())
    }
}

fn trip(armed: Option<(CrashPoint, CrashAction)>, here: CrashPoint) -> io::Result<()> {
    match armed {
        Some((point, action)) if point == here => match action {
            CrashAction::Abort => std::process::abort(),
            CrashAction::Fail => Err(io::Error::other(format!("simulated crash at {here:?}"))),
        },
        _ => Ok(()),
    }
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

#[cfg(unix)]
fn sync_parent(path: &Path) {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    if let Ok(d) = File::open(dir) {
        let _ = d.sync_all();
    }
}

#[cfg(not(unix))]
fn sync_parent(_path: &Path) {}
