use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UrlError {
    #[error("malformed url: {0:?} is not an absolute http(s) url")]
    Malformed(String),
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("explicit mark quote must not be empty")]
    EmptyQuote,
    #[error("store file {path} is corrupt: {source}")]
    Corrupt {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("unsupported store version {0}")]
    UnsupportedVersion(u32),
    #[error("store i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("fetch failed for {url}: {reason}")]
    FetchFailed { url: String, reason: String },
    #[error("{0} is not in the cache")]
    NotCached(String),
    #[error("{url} has media type {media_type}, not html")]
    NotHtml { url: String, media_type: String },
    #[error("cache i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache index is corrupt: {0}")]
    CorruptIndex(#[from] serde_json::Error),
}

/// Failure of an end-to-end annotate or stats request.
#[derive(Debug, Error)]
pub enum LiveMarkError {
    #[error(transparent)]
    Url(#[from] UrlError),
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error(transparent)]
    Store(#[from] StoreError),
}
