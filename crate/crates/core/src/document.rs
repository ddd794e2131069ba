//! Parsed page model: visible text runs and their tokens.

use serde::{Deserialize, Serialize};

use crate::decode;
use crate::html::{self, Event, WalkOptions};
use crate::token::{self, Token};
use crate::url::NormalizedUrl;

/// One visible text node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextRun {
    pub run_index: usize,
    pub content: String,
    /// Child indices from the document root down to the text node.
    pub source_location: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageDocument {
    pub url: NormalizedUrl,
    pub raw_html: Vec<u8>,
    pub text_runs: Vec<TextRun>,
    pub tokens: Vec<Token>,
    encoding: &'static encoding_rs::Encoding,
    source: String,
    visible_text: String,
    run_starts: Vec<usize>,
}

impl PageDocument {
    /// Concatenation of all run contents in document order.
    pub fn visible_text(&self) -> &str {
        &self.visible_text
    }

    /// Decoded source the runs were extracted from.
    pub fn source_text(&self) -> &str {
        &self.source
    }

    pub fn encoding_name(&self) -> &'static str {
        self.encoding.name()
    }

    /// Offset of run `index` inside `visible_text()`.
    pub fn run_start(&self, index: usize) -> usize {
        self.run_starts[index]
    }

    /// Offset into `visible_text()` of byte `offset` in run `run`.
    pub fn global_offset(&self, run: usize, offset: usize) -> usize {
        self.run_starts[run] + offset
    }

    /// Run and in-run offset of a position in `visible_text()`. With
    /// `prefer_end`, a position on a run boundary maps to the end of the
    /// earlier run instead of the start of the later one.
    pub fn locate(&self, global: usize, prefer_end: bool) -> (usize, usize) {
        let idx = if prefer_end {
            self.run_starts.partition_point(|&s| s < global)
        } else {
            self.run_starts.partition_point(|&s| s <= global)
        };
        let run = idx.saturating_sub(1);
        (run, global - self.run_starts.get(run).copied().unwrap_or(0))
    }

    /// Token span `[start, end)` in `visible_text()` byte offsets.
    pub fn token_range(&self, first: usize, last_exclusive: usize) -> (usize, usize) {
        let a = &self.tokens[first];
        let b = &self.tokens[last_exclusive - 1];
        (
            self.global_offset(a.run_index, a.start),
            self.global_offset(b.run_index, b.end),
        )
    }
}

/// Parses `bytes` as an HTML page. Never fails: malformed markup goes
/// through standard tree-construction recovery and undecodable bytes become
/// U+FFFD.
pub fn parse_page(url: NormalizedUrl, bytes: &[u8]) -> PageDocument {
    parse_page_with_media_type(url, bytes, None)
}

/// Like [`parse_page`], honoring a `charset` parameter of the transport
/// media type.
pub fn parse_page_with_media_type(
    url: NormalizedUrl,
    bytes: &[u8],
    media_type: Option<&str>,
) -> PageDocument {
    let (source, encoding) = decode::decode(bytes, media_type);
    let tree = html::parse(&source);
    let mut text_runs = Vec::new();
    html::walk(
        &tree,
        &WalkOptions { skip_scripts: false, unwrap_annotations: false },
        |event| {
            if let Event::Text { text, run: Some(run_index), path, .. } = event {
                text_runs.push(TextRun {
                    run_index,
                    content: text.to_string(),
                    source_location: path.to_vec(),
                });
            }
        },
    );
    let mut visible_text = String::with_capacity(text_runs.iter().map(|r| r.content.len()).sum());
    let mut run_starts = Vec::with_capacity(text_runs.len());
    for run in &text_runs {
        run_starts.push(visible_text.len());
        visible_text.push_str(&run.content);
    }
    let tokens = token::tokenize_runs(text_runs.iter().map(|r| r.content.as_str()));
    PageDocument {
        url,
        raw_html: bytes.to_vec(),
        text_runs,
        tokens,
        encoding,
        source,
        visible_text,
        run_starts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::url::normalize_url;

    fn page(html: &str) -> PageDocument {
        parse_page(normalize_url("http://example.com/").unwrap(), html.as_bytes())
    }

    fn contents(doc: &PageDocument) -> Vec<&str> {
        doc.text_runs.iter().map(|r| r.content.as_str()).collect()
    }

    #[test]
    fn two_runs() {
        let doc = page("<p>Hello <b>web</b></p>");
        assert_eq!(contents(&doc), ["Hello ", "web"]);
        assert_eq!(doc.visible_text(), "Hello web");
        let folded: Vec<_> = doc.tokens.iter().map(|t| t.folded.as_str()).collect();
        assert_eq!(folded, ["hello", "web"]);
        assert_eq!(doc.tokens[1].run_index, 1);
    }

    #[test]
    fn script_excluded() {
        let doc = page("<script>var x=1</script><p>hi</p>");
        assert_eq!(contents(&doc), ["hi"]);
    }

    #[test]
    fn empty_document() {
        let doc = page("");
        assert!(doc.text_runs.is_empty());
        assert!(doc.tokens.is_empty());
        assert_eq!(doc.visible_text(), "");
    }

    #[test]
    fn hidden_content_excluded() {
        let doc = page(
            "<html><head><title>T</title><style>p{}</style></head><body>\
             <!-- note --><noscript>ns</noscript><img alt=\"alt text\">\
             <textarea>ta</textarea><template><p>tpl</p></template><p title=\"attr\">shown</p></body></html>",
        );
        assert_eq!(contents(&doc), ["shown"]);
    }

    #[test]
    fn malformed_html_recovers() {
        let doc = page("<p>one<div>two</p>three<b><i>four</b>five");
        assert_eq!(doc.visible_text(), "onetwothreefourfive");
    }

    #[test]
    fn source_locations_point_at_text() {
        let doc = page("<p>Hello <b>web</b></p>");
        // document > html(0) > body(1) > p(0) > b(1) > text(0)
        assert_eq!(doc.text_runs[1].source_location, vec![0, 1, 0, 1, 0]);
        assert_eq!(doc.text_runs[0].source_location, vec![0, 1, 0, 0]);
    }

    #[test]
    fn locate_maps_boundaries() {
        let doc = page("<p>ab<b>cd</b></p>");
        assert_eq!(doc.locate(2, false), (1, 0));
        assert_eq!(doc.locate(2, true), (0, 2));
        assert_eq!(doc.locate(4, true), (1, 2));
        assert_eq!(doc.locate(0, false), (0, 0));
    }

    #[test]
    fn declared_charset_is_honored() {
        let doc = parse_page(
            normalize_url("http://example.com/").unwrap(),
            b"<meta charset=\"iso-8859-1\"><p>caf\xe9</p>",
        );
        assert_eq!(doc.visible_text(), "caf\u{e9}");
        assert_eq!(doc.encoding_name(), "windows-1252");
    }

    #[test]
    fn tokens_lie_within_runs_in_order() {
        let doc = page("<div>Marking <i>web-pages</i>, twice: <span>marking!</span></div>");
        let mut last = (0, 0);
        for t in &doc.tokens {
            let run = &doc.text_runs[t.run_index].content;
            assert!(t.start < t.end && t.end <= run.len());
            assert_eq!(&run[t.start..t.end], t.surface);
            assert!((t.run_index, t.start) >= last);
            last = (t.run_index, t.end);
        }
        assert_eq!(doc.tokens.len(), 5);
    }
}
