//! Implicit marks: page terms intersected with profile keywords.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::document::PageDocument;
use crate::matcher::PhraseMatcher;
use crate::profile::{Keyword, Profile};

/// One place a keyword occurs: page tokens `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Occurrence {
    pub start: usize,
    pub end: usize,
    pub keyword: Keyword,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImplicitMarkSet {
    /// Keyword entries found at least once on the page.
    pub matched_terms: BTreeSet<Keyword>,
    /// Every match position, ordered by (start, end, keyword).
    pub occurrences: Vec<Occurrence>,
}

impl ImplicitMarkSet {
    pub fn is_empty(&self) -> bool {
        self.matched_terms.is_empty()
    }
}

pub fn compute_implicit_marks(doc: &PageDocument, profile: &Profile) -> ImplicitMarkSet {
    let keywords = profile.keywords();
    if keywords.is_empty() || doc.tokens.is_empty() {
        return ImplicitMarkSet::default();
    }
    let matcher = PhraseMatcher::new(keywords.iter().map(|k| k.terms().iter()));
    let mut occurrences: Vec<Occurrence> = matcher
        .find_all(doc.tokens.iter().map(|t| t.folded.as_str()))
        .into_iter()
        .map(|m| Occurrence { start: m.start, end: m.end, keyword: keywords[m.pattern].clone() })
        .collect();
    occurrences.sort();
    let matched_terms = occurrences.iter().map(|o| o.keyword.clone()).collect();
    ImplicitMarkSet { matched_terms, occurrences }
}
