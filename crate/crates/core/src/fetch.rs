//! Page retrieval with an on-disk cache.
//!
//! Layout under the cache directory:
//!
//! ```text
//! index.json            {"<normalized url>": {"content_hash", "media_type", "fetched_at"}}
//! objects/<sha256 hex>  page bytes
//! ```

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::FetchError;
use crate::time::{self, Timestamp};
use crate::url::NormalizedUrl;

pub const DEFAULT_MEDIA_TYPE: &str = "text/html";
const BODY_LIMIT: u64 = 64 * 1024 * 1024;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CacheMode {
    #[default]
    PreferCache,
    Refresh,
    Offline,
}

impl FromStr for CacheMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "prefer-cache" | "" => Ok(CacheMode::PreferCache),
            "refresh" => Ok(CacheMode::Refresh),
            "offline" => Ok(CacheMode::Offline),
            other => Err(format!("unknown cache mode {other:?} (prefer-cache, refresh, offline)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchResult {
    pub url: NormalizedUrl,
    pub body: Vec<u8>,
    pub media_type: String,
    pub fetched_at: Timestamp,
    pub from_cache: bool,
}

impl FetchResult {
    pub fn is_html(&self) -> bool {
        is_html_media_type(&self.media_type)
    }

    /// `NotHtml` for non-HTML media types. Callers decide whether that is
    /// fatal.
    pub fn check_html(&self) -> Result<(), FetchError> {
        if self.is_html() {
            Ok(())
        } else {
            Err(FetchError::NotHtml { url: self.url.to_string(), media_type: self.media_type.clone() })
        }
    }
}

pub fn is_html_media_type(media_type: &str) -> bool {
    let essence = media_type.split(';').next().unwrap_or("").trim();
    essence.eq_ignore_ascii_case("text/html") || essence.eq_ignore_ascii_case("application/xhtml+xml")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub content_hash: String,
    pub media_type: String,
    #[serde(with = "time")]
    pub fetched_at: Timestamp,
}

pub struct Fetcher {
    dir: PathBuf,
    index: Mutex<BTreeMap<NormalizedUrl, CacheEntry>>,
    agent: ureq::Agent,
}

impl std::fmt::Debug for Fetcher {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fetcher").field("dir", &self.dir).finish_non_exhaustive()
    }
}

impl Fetcher {
    pub fn new(cache_dir: impl Into<PathBuf>) -> Result<Self, FetchError> {
        let dir = cache_dir.into();
        fs::create_dir_all(dir.join("objects"))?;
        let index = match fs::read(dir.join("index.json")) {
            Ok(bytes) => serde_json::from_slice(&bytes)?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(e.into()),
        };
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .user_agent(concat!("livemark/", env!("CARGO_PKG_VERSION")))
            .build()
            .into();
        Ok(Fetcher { dir, index: Mutex::new(index), agent })
    }

    pub fn cache_dir(&self) -> &Path {
        &self.dir
    }

    pub fn entry(&self, url: &NormalizedUrl) -> Option<CacheEntry> {
        self.index.lock().expect("cache lock poisoned").get(url).cloned()
    }

    pub fn fetch(&self, url: &NormalizedUrl, mode: CacheMode) -> Result<FetchResult, FetchError> {
        match mode {
            CacheMode::Offline => self.cached(url)?.ok_or_else(|| FetchError::NotCached(url.to_string())),
            CacheMode::PreferCache => match self.cached(url)? {
                Some(hit) => Ok(hit),
                None => self.download(url),
            },
            CacheMode::Refresh => self.download(url),
        }
    }

    /// The cached copy of `url`, if any.
    pub fn cached(&self, url: &NormalizedUrl) -> Result<Option<FetchResult>, FetchError> {
        let Some(entry) = self.entry(url) else {
            return Ok(None);
        };
        let body = match fs::read(self.object_path(&entry.content_hash)) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                log::warn!("cache object for {url} is missing");
                return Ok(None);
            }
            Err(e) => return Err(e.into()),
        };
        Ok(Some(FetchResult {
            url: url.clone(),
            body,
            media_type: entry.media_type,
            fetched_at: entry.fetched_at,
            from_cache: true,
        }))
    }

    /// Stores `body` as the current content of `url`.
    pub fn ingest(&self, url: &NormalizedUrl, body: Vec<u8>, media_type: Option<&str>) -> Result<FetchResult, FetchError> {
        let media_type = media_type.filter(|m| !m.trim().is_empty()).unwrap_or(DEFAULT_MEDIA_TYPE).trim().to_string();
        let hash = hex::encode(Sha256::digest(&body));
        let object = self.object_path(&hash);
        if !object.exists() {
            write_atomic(&object, &body)?;
        }
        let entry = CacheEntry { content_hash: hash, media_type: media_type.clone(), fetched_at: time::now() };
        let fetched_at = entry.fetched_at;
        {
            let mut index = self.index.lock().expect("cache lock poisoned");
            index.insert(url.clone(), entry);
            let bytes = serde_json::to_vec_pretty(&*index)?;
            write_atomic(&self.dir.join("index.json"), &bytes)?;
        }
        Ok(FetchResult { url: url.clone(), body, media_type, fetched_at, from_cache: false })
    }

    /// Reads a local file and caches it under `url`.
    pub fn ingest_file(&self, url: &NormalizedUrl, path: &Path) -> Result<FetchResult, FetchError> {
        let body = fs::read(path).map_err(|e| FetchError::FetchFailed {
            url: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let media_type = match path.extension().and_then(|e| e.to_str()) {
            Some("xhtml") => "application/xhtml+xml",
            Some("html" | "htm") | None => DEFAULT_MEDIA_TYPE,
            Some("txt") => "text/plain",
            Some(_) => "application/octet-stream",
        };
        self.ingest(url, body, Some(media_type))
    }

    fn download(&self, url: &NormalizedUrl) -> Result<FetchResult, FetchError> {
        let failed = |reason: String| FetchError::FetchFailed { url: url.to_string(), reason };
        let mut response = self.agent.get(url.as_str()).call().map_err(|e| failed(e.to_string()))?;
        let media_type = response
            .headers()
            .get("content-type")
            .and_then(|v| v.to_str().ok())
            .map(str::to_string);
        let body = response
            .body_mut()
            .with_config()
            .limit(BODY_LIMIT)
            .read_to_vec()
            .map_err(|e| failed(e.to_string()))?;
        self.ingest(url, body, media_type.as_deref())
    }

    fn object_path(&self, hash: &str) -> PathBuf {
        self.dir.join("objects").join(hash)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp_name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    static SEQ: AtomicU64 = AtomicU64::new(0);
    tmp_name.push(format!(".{}-{}.tmp", std::process::id(), SEQ.fetch_add(1, Ordering::Relaxed)));
    let tmp = path.with_file_name(tmp_name);
    {
        let mut file = File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)
}
