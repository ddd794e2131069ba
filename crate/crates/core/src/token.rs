//! Term extraction: every maximal run of Unicode letters and digits is a
//! token, everything else separates. Tokens are case-folded, never stemmed.

use serde::{Deserialize, Serialize};

use crate::document::PageDocument;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub folded: String,
    pub run_index: usize,
    /// Byte offsets into the owning run's content.
    pub start: usize,
    pub end: usize,
}

pub fn is_token_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Full Unicode case fold.
pub fn fold(s: &str) -> String {
    if s.is_ascii() {
        s.to_ascii_lowercase()
    } else {
        caseless::default_case_fold_str(s)
    }
}

/// Byte spans of the tokens in `text`.
pub fn token_spans(text: &str) -> impl Iterator<Item = (usize, usize)> + '_ {
    let mut chars = text.char_indices().peekable();
    std::iter::from_fn(move || {
        let start = loop {
            let (i, c) = chars.next()?;
            if is_token_char(c) {
                break i;
            }
        };
        let mut end = text.len();
        while let Some(&(i, c)) = chars.peek() {
            if !is_token_char(c) {
                end = i;
                break;
            }
            chars.next();
        }
        Some((start, end))
    })
}

/// Folded tokens of an arbitrary string, e.g. a raw profile keyword.
pub fn fold_terms(text: &str) -> Vec<String> {
    token_spans(text).map(|(s, e)| fold(&text[s..e])).collect()
}

pub fn tokenize(doc: &PageDocument) -> Vec<Token> {
    tokenize_runs(doc.text_runs.iter().map(|r| r.content.as_str()))
}

pub(crate) fn tokenize_runs<'a>(runs: impl Iterator<Item = &'a str>) -> Vec<Token> {
    let mut out = Vec::new();
    for (run_index, content) in runs.enumerate() {
        for (start, end) in token_spans(content) {
            let surface = &content[start..end];
            out.push(Token {
                surface: surface.to_string(),
                folded: fold(surface),
                run_index,
                start,
                end,
            });
        }
    }
    out
}
