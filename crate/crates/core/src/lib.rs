//! Two-tier personalized marking of web pages.
//!
//! Implicit marks come from intersecting a page's terms with a user's
//! profile keywords. Explicit marks are quotes the user selected on an
//! earlier visit, stored with a little surrounding context and re-anchored
//! every time the page is rendered.

pub mod anchor;
mod decode;
pub mod document;
pub mod engine;
pub mod error;
pub mod fetch;
mod html;
pub mod implicit;
pub mod matcher;
pub mod profile;
pub mod render;
pub mod report;
pub mod store;
pub mod time;
pub mod token;
pub mod url;

pub use anchor::{anchor_explicit_marks, AnchorOutcome, ExplicitMark, NewMark, ResolvedAnchor};
pub use document::{parse_page, parse_page_with_media_type, PageDocument, TextRun};
pub use engine::{first_visit, mark_page, Annotation, LiveMarker};
pub use error::{FetchError, LiveMarkError, StoreError, UrlError};
pub use fetch::{CacheMode, FetchResult, Fetcher};
pub use implicit::{compute_implicit_marks, ImplicitMarkSet, Occurrence};
pub use report::{parse_url_list, Report, ReportRow};
pub use render::{count_marks, render_marked_page, MarkStats, MarkedPage, MarkerPair};
pub use profile::{Keyword, Profile};
pub use html::{annotated_text, strip_annotations, visible_text_of, AnnotatedText, MarkClass};
pub use store::{Store, StoreFile, Visit};
pub use token::{fold, tokenize, Token};
pub use url::{normalize_url, NormalizedUrl};
