//! Explicit marks and re-anchoring them in a (possibly changed) page.
//!
//! A mark is a quote selector: the exact visible text the user selected,
//! plus up to [`CONTEXT_LEN`] characters of visible text on either side as
//! they were when the mark was made.

use serde::{Deserialize, Serialize};

use crate::document::PageDocument;
use crate::time::{self, Timestamp};
use crate::url::NormalizedUrl;

/// Maximum prefix/suffix length, in Unicode scalar values.
pub const CONTEXT_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitMark {
    #[serde(rename = "id")]
    pub mark_id: String,
    #[serde(rename = "user")]
    pub user_id: String,
    pub url: NormalizedUrl,
    pub quote: String,
    pub prefix: String,
    pub suffix: String,
    #[serde(with = "time")]
    pub created_at: Timestamp,
}

/// A mark as submitted by a client, before the store assigns an id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewMark {
    #[serde(rename = "user")]
    pub user_id: String,
    pub url: NormalizedUrl,
    pub quote: String,
    #[serde(default)]
    pub prefix: String,
    #[serde(default)]
    pub suffix: String,
}

impl NewMark {
    /// Builds a mark for `visible_text()[start..end]` of `doc`, capturing
    /// context the way a browser selection would.
    pub fn from_selection(user_id: impl Into<String>, doc: &PageDocument, start: usize, end: usize) -> Self {
        let text = doc.visible_text();
        NewMark {
            user_id: user_id.into(),
            url: doc.url.clone(),
            quote: text[start..end].to_string(),
            prefix: clamp_prefix(&text[..start]).to_string(),
            suffix: clamp_suffix(&text[end..]).to_string(),
        }
    }
}

/// Last `CONTEXT_LEN` characters of `s`.
pub fn clamp_prefix(s: &str) -> &str {
    match s.char_indices().rev().nth(CONTEXT_LEN - 1) {
        Some((i, _)) => &s[i..],
        None => s,
    }
}

/// First `CONTEXT_LEN` characters of `s`.
pub fn clamp_suffix(s: &str) -> &str {
    match s.char_indices().nth(CONTEXT_LEN) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

/// Where a mark's quote was found in the current page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedAnchor {
    pub mark_id: String,
    pub start_run: usize,
    pub start_offset: usize,
    pub end_run: usize,
    pub end_offset: usize,
}

impl ResolvedAnchor {
    /// Byte range in the page's visible text.
    pub fn range(&self, doc: &PageDocument) -> (usize, usize) {
        (
            doc.global_offset(self.start_run, self.start_offset),
            doc.global_offset(self.end_run, self.end_offset),
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnchorOutcome {
    pub resolved: Vec<ResolvedAnchor>,
    pub orphaned: Vec<String>,
}

/// Re-locates each mark's quote in `doc`.
///
/// A unique occurrence is taken as is. Among several, the one whose
/// surrounding text agrees with the stored prefix and suffix over the most
/// characters wins, earliest first on ties. A quote that no longer occurs
/// leaves the mark orphaned.
pub fn anchor_explicit_marks(doc: &PageDocument, marks: &[ExplicitMark]) -> AnchorOutcome {
    let mut outcome = AnchorOutcome::default();
    for mark in marks {
        match locate_quote(doc.visible_text(), &mark.quote, &mark.prefix, &mark.suffix) {
            Some(start) => {
                let end = start + mark.quote.len();
                let (start_run, start_offset) = doc.locate(start, false);
                let (end_run, end_offset) = doc.locate(end, true);
                outcome.resolved.push(ResolvedAnchor {
                    mark_id: mark.mark_id.clone(),
                    start_run,
                    start_offset,
                    end_run,
                    end_offset,
                });
            }
            None => outcome.orphaned.push(mark.mark_id.clone()),
        }
    }
    outcome
}

/// Byte offset of the best occurrence of `quote` in `text`.
pub fn locate_quote(text: &str, quote: &str, prefix: &str, suffix: &str) -> Option<usize> {
    if quote.is_empty() {
        return None;
    }
    let mut best: Option<(usize, usize)> = None;
    let mut from = 0;
    let mut count = 0;
    while let Some(found) = text[from..].find(quote) {
        let start = from + found;
        count += 1;
        let score = context_score(text, start, start + quote.len(), prefix, suffix);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((start, score));
        }
        let step = text[start..].chars().next().map_or(1, char::len_utf8);
        from = start + step;
    }
    log::trace!("quote {quote:?}: {count} occurrence(s)");
    best.map(|(start, _)| start)
}

fn context_score(text: &str, start: usize, end: usize, prefix: &str, suffix: &str) -> usize {
    let before = text[..start].chars().rev().zip(prefix.chars().rev()).take_while(|(a, b)| a == b).count();
    let after = text[end..].chars().zip(suffix.chars()).take_while(|(a, b)| a == b).count();
    before + after
}
