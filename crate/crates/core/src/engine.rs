//! The marking pipeline: fetch, parse, mark, render, record the visit.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::anchor::{anchor_explicit_marks, ExplicitMark};
use crate::document::{parse_page_with_media_type, PageDocument};
use crate::error::LiveMarkError;
use crate::fetch::{CacheMode, FetchResult, Fetcher};
use crate::implicit::{compute_implicit_marks, ImplicitMarkSet};
use crate::profile::Profile;
use crate::render::{render_marked_page, MarkStats, MarkedPage, MarkerPair};
use crate::store::Store;
use crate::url::NormalizedUrl;

/// True iff `url` has no visit record in `visited`.
pub fn first_visit(url: &NormalizedUrl, visited: &BTreeSet<NormalizedUrl>) -> bool {
    !visited.contains(url)
}

/// Marks `doc` for a user. Explicit marks are only applied on revisits.
pub fn mark_page(
    doc: &PageDocument,
    profile: &Profile,
    marks: &[ExplicitMark],
    is_first_visit: bool,
) -> (MarkerPair, MarkedPage) {
    let implicit = compute_implicit_marks(doc, profile);
    let pair = if is_first_visit {
        MarkerPair::first_visit(implicit)
    } else {
        MarkerPair::revisit(implicit, anchor_explicit_marks(doc, marks))
    };
    let page = render_marked_page(doc, &pair);
    (pair, page)
}

#[derive(Debug, Clone)]
pub struct Annotation {
    pub url: NormalizedUrl,
    /// Whether this was the user's first visit, judged before recording it.
    pub first_visit: bool,
    pub page: MarkedPage,
    pub implicit: ImplicitMarkSet,
    pub orphaned: Vec<String>,
    pub from_cache: bool,
}

impl Annotation {
    pub fn stats(&self) -> MarkStats {
        self.page.stats
    }
}

/// Store and fetcher wired together.
#[derive(Debug)]
pub struct LiveMarker {
    store: Store,
    fetcher: Fetcher,
}

impl LiveMarker {
    pub fn new(store: Store, fetcher: Fetcher) -> Self {
        LiveMarker { store, fetcher }
    }

    pub fn open(store_path: impl Into<PathBuf>, cache_dir: impl Into<PathBuf>) -> Result<Self, LiveMarkError> {
        Ok(LiveMarker::new(Store::open(store_path)?, Fetcher::new(cache_dir)?))
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn fetcher(&self) -> &Fetcher {
        &self.fetcher
    }

    pub fn profile_or_empty(&self, user_id: &str) -> Profile {
        self.store.profile(user_id).unwrap_or_else(|| Profile::empty(user_id))
    }

    pub fn annotate(&self, user_id: &str, url: &NormalizedUrl, mode: CacheMode) -> Result<Annotation, LiveMarkError> {
        let fetched = self.fetcher.fetch(url, mode)?;
        self.annotate_fetched(user_id, fetched)
    }

    /// Annotates a local file, caching its bytes under `url`.
    pub fn annotate_file(&self, user_id: &str, url: &NormalizedUrl, path: &Path) -> Result<Annotation, LiveMarkError> {
        let fetched = self.fetcher.ingest_file(url, path)?;
        self.annotate_fetched(user_id, fetched)
    }

    fn annotate_fetched(&self, user_id: &str, fetched: FetchResult) -> Result<Annotation, LiveMarkError> {
        if let Err(e) = fetched.check_html() {
            log::warn!("{e}; marking it anyway");
        }
        let (is_first, pair, page) = self.mark(user_id, &fetched);
        self.store.record_visit(user_id, &fetched.url)?;
        Ok(Annotation {
            url: fetched.url,
            first_visit: is_first,
            page,
            implicit: pair.implicit,
            orphaned: pair.orphaned,
            from_cache: fetched.from_cache,
        })
    }

    /// Counts for `url` from the cached copy and the current store, without
    /// recording a visit.
    pub fn page_stats(&self, user_id: &str, url: &NormalizedUrl, mode: CacheMode) -> Result<MarkStats, LiveMarkError> {
        let fetched = self.fetcher.fetch(url, mode)?;
        let (_, _, page) = self.mark(user_id, &fetched);
        Ok(page.stats)
    }

    fn mark(&self, user_id: &str, fetched: &FetchResult) -> (bool, MarkerPair, MarkedPage) {
        let doc = parse_page_with_media_type(fetched.url.clone(), &fetched.body, Some(&fetched.media_type));
        let is_first = first_visit(&fetched.url, &self.store.visited_urls(user_id));
        let profile = self.profile_or_empty(user_id);
        let marks = if is_first { Vec::new() } else { self.store.get_marks(user_id, &fetched.url) };
        let (pair, page) = mark_page(&doc, &profile, &marks, is_first);
        (is_first, pair, page)
    }
}
