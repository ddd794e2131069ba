//! Python bindings: `import livemark`.
//!
//! Pages, profiles and the marking pipeline are exposed as classes; marks
//! and stats come back as plain dicts.

use std::path::PathBuf;

use livemark_core as core;
use livemark_core::{CacheMode, ExplicitMark, MarkStats, NormalizedUrl};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(livemark, LiveMarkError, PyException, "Base class of livemark errors.");
create_exception!(livemark, FetchError, LiveMarkError, "A page could not be fetched or read.");
create_exception!(livemark, StoreError, LiveMarkError, "The store could not be read or written.");

fn to_py(err: core::LiveMarkError) -> PyErr {
    match err {
        core::LiveMarkError::Url(e) => PyValueError::new_err(e.to_string()),
        core::LiveMarkError::Store(core::StoreError::EmptyQuote) => PyValueError::new_err(err.to_string()),
        core::LiveMarkError::Store(e) => StoreError::new_err(e.to_string()),
        core::LiveMarkError::Fetch(e) => FetchError::new_err(e.to_string()),
    }
}

fn url_arg(raw: &str) -> PyResult<NormalizedUrl> {
    core::normalize_url(raw).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn mark_dict<'py>(py: Python<'py>, mark: &ExplicitMark) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("id", &mark.mark_id)?;
    d.set_item("user", &mark.user_id)?;
    d.set_item("url", mark.url.as_str())?;
    d.set_item("quote", &mark.quote)?;
    d.set_item("prefix", &mark.prefix)?;
    d.set_item("suffix", &mark.suffix)?;
    d.set_item("created_at", core::time::format(&mark.created_at))?;
    Ok(d)
}

fn stats_dict<'py>(py: Python<'py>, stats: &MarkStats) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("implicit", stats.implicit_count)?;
    d.set_item("explicit", stats.explicit_count)?;
    d.set_item("orphaned", stats.orphaned_count)?;
    Ok(d)
}

/// Canonical form of an http(s) URL.
#[pyfunction]
fn normalize_url(url: &str) -> PyResult<String> {
    Ok(url_arg(url)?.to_string())
}

/// Text a reader sees in `html`, with no separators added between nodes.
#[pyfunction]
fn visible_text(html: &str) -> String {
    core::visible_text_of(html)
}

/// Removes the `lm-implicit` and `lm-explicit` wrappers from marked HTML.
#[pyfunction]
fn strip_annotations(html: &str) -> String {
    core::strip_annotations(html)
}

/// Parsed page: visible text and tokens.
#[pyclass(frozen, name = "Page")]
struct Page(core::PageDocument);

#[pymethods]
impl Page {
    #[new]
    #[pyo3(signature = (url, html, media_type=None))]
    fn new(url: &str, html: &[u8], media_type: Option<&str>) -> PyResult<Self> {
        Ok(Page(core::parse_page_with_media_type(url_arg(url)?, html, media_type)))
    }

    #[getter]
    fn url(&self) -> String {
        self.0.url.to_string()
    }

    #[getter]
    fn visible_text(&self) -> &str {
        self.0.visible_text()
    }

    #[getter]
    fn encoding(&self) -> &'static str {
        self.0.encoding_name()
    }

    /// `(surface, folded, start, end)` per token, byte offsets into
    /// `visible_text`.
    fn tokens(&self) -> Vec<(String, String, usize, usize)> {
        self.0
            .tokens
            .iter()
            .map(|t| {
                let base = self.0.run_start(t.run_index);
                (t.surface.clone(), t.folded.clone(), base + t.start, base + t.end)
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Page(url={:?}, tokens={})", self.0.url.as_str(), self.0.tokens.len())
    }
}

/// A user's keyword list. Phrases are allowed; duplicates are dropped.
#[pyclass(frozen, name = "Profile")]
struct Profile(core::Profile);

#[pymethods]
impl Profile {
    #[new]
    fn new(user: &str, keywords: Vec<String>) -> Self {
        Profile(core::Profile::new(user, keywords))
    }

    #[getter]
    fn user(&self) -> &str {
        &self.0.user_id
    }

    #[getter]
    fn keywords(&self) -> Vec<String> {
        self.0.keywords().iter().map(ToString::to_string).collect()
    }

    fn __repr__(&self) -> String {
        format!("Profile(user={:?}, keywords={:?})", self.0.user_id, self.keywords())
    }
}

/// Keywords of `profile` found on `page` and where:
/// `(matched, [(first_token, end_token, keyword), ...])`.
#[pyfunction]
fn implicit_marks(page: &Page, profile: &Profile) -> (Vec<String>, Vec<(usize, usize, String)>) {
    let set = core::compute_implicit_marks(&page.0, &profile.0);
    (
        set.matched_terms.iter().map(ToString::to_string).collect(),
        set.occurrences.iter().map(|o| (o.start, o.end, o.keyword.to_string())).collect(),
    )
}

/// Marks `page` for `profile`. `marks` are dicts with `quote` and optional
/// `id`, `prefix` and `suffix`; they are ignored on a first visit.
/// Returns `(html, stats)`.
#[pyfunction]
#[pyo3(signature = (page, profile, marks=Vec::new(), first_visit=false))]
fn mark_page<'py>(
    py: Python<'py>,
    page: &Page,
    profile: &Profile,
    marks: Vec<Bound<'py, PyDict>>,
    first_visit: bool,
) -> PyResult<(String, Bound<'py, PyDict>)> {
    let mut explicit = Vec::with_capacity(marks.len());
    for (i, m) in marks.iter().enumerate() {
        let text = |key: &str| -> PyResult<Option<String>> {
            m.get_item(key)?.map(|v| v.extract::<String>()).transpose()
        };
        explicit.push(ExplicitMark {
            mark_id: text("id")?.unwrap_or_else(|| format!("m-{:06}", i + 1)),
            user_id: profile.0.user_id.clone(),
            url: page.0.url.clone(),
            quote: text("quote")?.ok_or_else(|| PyValueError::new_err("mark without a quote"))?,
            prefix: text("prefix")?.unwrap_or_default(),
            suffix: text("suffix")?.unwrap_or_default(),
            created_at: core::time::now(),
        });
    }
    let (_, marked) = py.detach(|| core::mark_page(&page.0, &profile.0, &explicit, first_visit));
    Ok((marked.html, stats_dict(py, &marked.stats)?))
}

/// Store-backed marking pipeline, the same one the CLI and service use.
#[pyclass(frozen, name = "LiveMarker")]
struct LiveMarker(core::LiveMarker);

#[pymethods]
impl LiveMarker {
    #[new]
    fn new(store: PathBuf, cache: PathBuf) -> PyResult<Self> {
        core::LiveMarker::open(store, cache).map(LiveMarker).map_err(to_py)
    }

    fn put_profile(&self, user: &str, keywords: Vec<String>) -> PyResult<Profile> {
        self.0.store().put_profile(user, keywords).map(Profile).map_err(|e| to_py(e.into()))
    }

    fn profile(&self, user: &str) -> Option<Profile> {
        self.0.store().profile(user).map(Profile)
    }

    #[pyo3(signature = (user, url, quote, prefix=String::new(), suffix=String::new()))]
    fn add_mark<'py>(
        &self,
        py: Python<'py>,
        user: &str,
        url: &str,
        quote: String,
        prefix: String,
        suffix: String,
    ) -> PyResult<Bound<'py, PyDict>> {
        let new = core::NewMark { user_id: user.to_string(), url: url_arg(url)?, quote, prefix, suffix };
        let mark = self.0.store().add_mark(new).map_err(|e| to_py(e.into()))?;
        mark_dict(py, &mark)
    }

    fn get_marks<'py>(&self, py: Python<'py>, user: &str, url: &str) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let url = url_arg(url)?;
        self.0.store().get_marks(user, &url).iter().map(|m| mark_dict(py, m)).collect()
    }

    fn delete_mark(&self, id: &str) -> PyResult<bool> {
        self.0.store().delete_mark(id).map_err(|e| to_py(e.into()))
    }

    /// Puts `html` in the page cache under `url`.
    fn cache_page(&self, url: &str, html: Vec<u8>) -> PyResult<()> {
        let url = url_arg(url)?;
        self.0.fetcher().ingest(&url, html, Some("text/html")).map(drop).map_err(|e| to_py(e.into()))
    }

    /// Marks a page and records the visit. Returns a dict with `url`,
    /// `first_visit`, `html` and `stats`.
    #[pyo3(signature = (user, url, cache_mode="prefer-cache"))]
    fn annotate<'py>(&self, py: Python<'py>, user: &str, url: &str, cache_mode: &str) -> PyResult<Bound<'py, PyDict>> {
        let url = url_arg(url)?;
        let mode: CacheMode = cache_mode.parse().map_err(PyValueError::new_err)?;
        let annotation = py.detach(|| self.0.annotate(user, &url, mode)).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("url", annotation.url.as_str())?;
        d.set_item("first_visit", annotation.first_visit)?;
        d.set_item("stats", stats_dict(py, &annotation.stats())?)?;
        d.set_item("html", annotation.page.html)?;
        Ok(d)
    }

    /// Counts for a cached page without recording a visit.
    #[pyo3(signature = (user, url, cache_mode="offline"))]
    fn stats<'py>(&self, py: Python<'py>, user: &str, url: &str, cache_mode: &str) -> PyResult<Bound<'py, PyDict>> {
        let url = url_arg(url)?;
        let mode: CacheMode = cache_mode.parse().map_err(PyValueError::new_err)?;
        let stats = py.detach(|| self.0.page_stats(user, &url, mode)).map_err(to_py)?;
        stats_dict(py, &stats)
    }
}

#[pymodule]
fn livemark(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("LiveMarkError", py.get_type::<LiveMarkError>())?;
    m.add("FetchError", py.get_type::<FetchError>())?;
    m.add("StoreError", py.get_type::<StoreError>())?;
    m.add_class::<Page>()?;
    m.add_class::<Profile>()?;
    m.add_class::<LiveMarker>()?;
    m.add_function(wrap_pyfunction!(normalize_url, m)?)?;
    m.add_function(wrap_pyfunction!(visible_text, m)?)?;
    m.add_function(wrap_pyfunction!(strip_annotations, m)?)?;
    m.add_function(wrap_pyfunction!(implicit_marks, m)?)?;
    m.add_function(wrap_pyfunction!(mark_page, m)?)?;
    Ok(())
}
