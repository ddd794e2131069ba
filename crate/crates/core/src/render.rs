//! Rendering the marked page: annotation wrappers injected into the
//! page's visible text nodes.
//!
//! Wrapper markup is fixed:
//!
//! ```text
//! <mark class="lm-implicit" data-lm-term="KEYWORD">...</mark>
//! <mark class="lm-explicit" data-lm-id="MARK_ID">...</mark>
//! ```
//!
//! Overlapping ranges are cut into non-overlapping pieces. Explicit marks
//! win every character they share with an implicit one, and wrappers never
//! cross a text node boundary, so they never nest.

use std::cmp::Reverse;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::anchor::{AnchorOutcome, ResolvedAnchor};
use crate::document::PageDocument;
use crate::html::{self, escape_into, WalkOptions};
use crate::implicit::ImplicitMarkSet;

pub const IMPLICIT_CLASS: &str = "lm-implicit";
pub const EXPLICIT_CLASS: &str = "lm-explicit";

/// Implicit marks plus the explicit anchors that resolved on this page.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MarkerPair {
    pub implicit: ImplicitMarkSet,
    pub explicit: Vec<ResolvedAnchor>,
    /// Explicit marks whose quote is gone from the page.
    pub orphaned: Vec<String>,
}

impl MarkerPair {
    /// First visit: no explicit marks are applied.
    pub fn first_visit(implicit: ImplicitMarkSet) -> Self {
        MarkerPair { implicit, explicit: Vec::new(), orphaned: Vec::new() }
    }

    pub fn revisit(implicit: ImplicitMarkSet, anchors: AnchorOutcome) -> Self {
        MarkerPair { implicit, explicit: anchors.resolved, orphaned: anchors.orphaned }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MarkStats {
    /// Distinct keyword entries matched on the page.
    #[serde(rename = "implicit")]
    pub implicit_count: usize,
    /// Explicit marks that resolved.
    #[serde(rename = "explicit")]
    pub explicit_count: usize,
    #[serde(rename = "orphaned")]
    pub orphaned_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedPage {
    pub html: String,
    pub stats: MarkStats,
}

/// IM/EM pair as reported per page and user.
pub fn count_marks(page: &MarkedPage) -> (usize, usize) {
    (page.stats.implicit_count, page.stats.explicit_count)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Label {
    Implicit(usize),
    Explicit(usize),
}

/// A labelled piece of one run, offsets local to the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Piece {
    start: usize,
    end: usize,
    label: Label,
}

pub fn render_marked_page(doc: &PageDocument, pair: &MarkerPair) -> MarkedPage {
    let terms: Vec<String> = pair.implicit.matched_terms.iter().map(|k| k.to_string()).collect();
    let pieces = layout(doc, pair);
    let explicit_ids: Vec<&str> = pair.explicit.iter().map(|a| a.mark_id.as_str()).collect();

    let tree = html::parse(doc.source_text());
    let html = html::serialize(
        &tree,
        &WalkOptions { skip_scripts: true, unwrap_annotations: false },
        |run, text, out| {
            debug_assert_eq!(text, doc.text_runs[run].content);
            let mut pos = 0;
            for piece in &pieces[run] {
                escape_into(out, &text[pos..piece.start], false);
                match piece.label {
                    Label::Implicit(k) => {
                        out.push_str("<mark class=\"lm-implicit\" data-lm-term=\"");
                        escape_into(out, &terms[k], true);
                    }
                    Label::Explicit(a) => {
                        out.push_str("<mark class=\"lm-explicit\" data-lm-id=\"");
                        escape_into(out, explicit_ids[a], true);
                    }
                }
                out.push_str("\">");
                escape_into(out, &text[piece.start..piece.end], false);
                out.push_str("</mark>");
                pos = piece.end;
            }
            escape_into(out, &text[pos..], false);
        },
    );

    MarkedPage {
        html,
        stats: MarkStats {
            implicit_count: pair.implicit.matched_terms.len(),
            explicit_count: pair.explicit.len(),
            orphaned_count: pair.orphaned.len(),
        },
    }
}

/// Splits all mark ranges into labelled, non-overlapping pieces grouped by
/// run.
fn layout(doc: &PageDocument, pair: &MarkerPair) -> Vec<Vec<Piece>> {
    let ordered_terms: Vec<_> = pair.implicit.matched_terms.iter().collect();
    let term_ids: Vec<usize> = pair
        .implicit
        .occurrences
        .iter()
        .map(|o| ordered_terms.binary_search(&&o.keyword).expect("occurrence keyword is a matched term"))
        .collect();

    // (start, end, id)
    let explicit: Vec<(usize, usize, usize)> = pair
        .explicit
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let (s, e) = a.range(doc);
            (s, e, i)
        })
        .filter(|(s, e, _)| s < e)
        .collect();
    let implicit: Vec<(usize, usize, usize)> = pair
        .implicit
        .occurrences
        .iter()
        .zip(&term_ids)
        .map(|(o, &k)| {
            let (s, e) = doc.token_range(o.start, o.end);
            (s, e, k)
        })
        .collect();

    let mut points: Vec<usize> = (0..doc.text_runs.len()).map(|r| doc.run_start(r)).collect();
    points.push(doc.visible_text().len());
    for &(s, e, _) in explicit.iter().chain(&implicit) {
        points.push(s);
        points.push(e);
    }
    points.sort_unstable();
    points.dedup();

    let mut explicit_by_start: Vec<usize> = (0..explicit.len()).collect();
    explicit_by_start.sort_by_key(|&i| (explicit[i].0, i));
    let mut implicit_by_start: Vec<usize> = (0..implicit.len()).collect();
    implicit_by_start.sort_by_key(|&i| (implicit[i].0, i));

    // Active sets ordered by precedence: earliest start first; for implicit
    // ranges the longer one wins a tie so phrases stay whole.
    let mut active_explicit: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut active_implicit: BTreeSet<(usize, Reverse<usize>, usize)> = BTreeSet::new();
    let (mut next_explicit, mut next_implicit) = (0, 0);

    let mut pieces: Vec<Vec<Piece>> = vec![Vec::new(); doc.text_runs.len()];
    for window in points.windows(2) {
        let (a, b) = (window[0], window[1]);
        while next_explicit < explicit_by_start.len() && explicit[explicit_by_start[next_explicit]].0 <= a {
            let i = explicit_by_start[next_explicit];
            active_explicit.insert((explicit[i].0, i));
            next_explicit += 1;
        }
        while next_implicit < implicit_by_start.len() && implicit[implicit_by_start[next_implicit]].0 <= a {
            let i = implicit_by_start[next_implicit];
            active_implicit.insert((implicit[i].0, Reverse(implicit[i].1), i));
            next_implicit += 1;
        }
        active_explicit.retain(|&(_, i)| explicit[i].1 > a);
        active_implicit.retain(|&(_, _, i)| implicit[i].1 > a);

        let label = if let Some(&(_, i)) = active_explicit.first() {
            Label::Explicit(explicit[i].2)
        } else if let Some(&(_, _, i)) = active_implicit.first() {
            Label::Implicit(implicit[i].2)
        } else {
            continue;
        };
        let (run, local) = doc.locate(a, false);
        let local_end = local + (b - a);
        let run_pieces = &mut pieces[run];
        match run_pieces.last_mut() {
            Some(last) if last.end == local && last.label == label => last.end = local_end,
            _ => run_pieces.push(Piece { start: local, end: local_end, label }),
        }
    }
    pieces
}
