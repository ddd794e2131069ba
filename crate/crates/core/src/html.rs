//! Tree walking shared by text-run extraction and serialization.
//!
//! Both sides must agree on which text nodes are visible and in which order,
//! so they share `walk` and the run counter it maintains.

use ego_tree::iter::Edge;
use scraper::node::{Doctype, Element};
use scraper::{Html, Node};

const HTML_NS: &str = "http://www.w3.org/1999/xhtml";

/// Containers whose text is never flowed as page text, or whose content
/// model cannot hold a `<mark>` element.
const TEXT_HIDING: &[&str] = &[
    "script", "style", "noscript", "template", "title", "textarea", "xmp", "iframe", "noembed",
    "noframes", "plaintext",
];

const RAW_TEXT: &[&str] = &[
    "style", "script", "xmp", "iframe", "noembed", "noframes", "plaintext", "noscript",
];

const VOID: &[&str] = &[
    "area", "base", "basefont", "bgsound", "br", "col", "embed", "frame", "hr", "img", "input",
    "keygen", "link", "meta", "param", "source", "track", "wbr",
];

pub(crate) fn parse(text: &str) -> Html {
    Html::parse_document(text)
}

fn is_html(el: &Element) -> bool {
    &*el.name.ns == HTML_NS
}

fn html_named(el: &Element, names: &[&str]) -> bool {
    is_html(el) && names.contains(&el.name())
}

pub(crate) fn is_annotation(el: &Element) -> bool {
    is_html(el)
        && el.name() == "mark"
        && matches!(el.attr("class"), Some("lm-implicit" | "lm-explicit"))
}

pub(crate) enum Event<'a> {
    Doctype(&'a Doctype),
    Open(&'a Element, bool),
    Close(&'a Element),
    /// `run` is `Some` for visible text; `raw` marks raw-text parents.
    Text {
        text: &'a str,
        run: Option<usize>,
        raw: bool,
        path: &'a [usize],
    },
    Comment(&'a str),
}

pub(crate) struct WalkOptions {
    pub skip_scripts: bool,
    pub unwrap_annotations: bool,
}

pub(crate) fn walk(html: &Html, opts: &WalkOptions, mut emit: impl FnMut(Event<'_>)) {
    let mut path: Vec<usize> = Vec::new();
    let mut sibling_counters: Vec<usize> = vec![0];
    let mut hidden_depth = 0usize;
    let mut skip_depth = 0usize;
    let mut run = 0usize;
    // Parent element names for raw-text detection.
    let mut parents: Vec<Option<&Element>> = Vec::new();

    for edge in html.tree.root().traverse() {
        match edge {
            Edge::Open(node) => {
                let is_root = node.parent().is_none();
                if !is_root {
                    let counter = sibling_counters.last_mut().expect("counter stack");
                    path.push(*counter);
                    *counter += 1;
                }
                sibling_counters.push(0);
                let element = node.value().as_element();
                parents.push(element);
                if skip_depth > 0 {
                    if element.is_some() {
                        skip_depth += 1;
                    }
                    continue;
                }
                match node.value() {
                    Node::Element(el) => {
                        if opts.skip_scripts && el.name() == "script" {
                            skip_depth = 1;
                            continue;
                        }
                        if html_named(el, TEXT_HIDING) {
                            hidden_depth += 1;
                        }
                        if opts.unwrap_annotations && is_annotation(el) {
                            continue;
                        }
                        let leading_newline = html_named(el, &["pre", "textarea", "listing"])
                            && node
                                .first_child()
                                .and_then(|c| c.value().as_text())
                                .is_some_and(|t| t.starts_with('\n'));
                        emit(Event::Open(el, leading_newline));
                    }
                    Node::Text(t) => {
                        if t.is_empty() {
                            continue;
                        }
                        let parent = parents.iter().rev().nth(1).copied().flatten();
                        let raw = parent.is_some_and(|p| html_named(p, RAW_TEXT));
                        let this_run = if hidden_depth == 0 {
                            run += 1;
                            Some(run - 1)
                        } else {
                            None
                        };
                        emit(Event::Text {
                            text: t,
                            run: this_run,
                            raw,
                            path: &path,
                        });
                    }
                    Node::Comment(c) => emit(Event::Comment(c)),
                    Node::Doctype(d) => emit(Event::Doctype(d)),
                    Node::Document | Node::Fragment | Node::ProcessingInstruction(_) => {}
                }
            }
            Edge::Close(node) => {
                if node.parent().is_some() {
                    path.pop();
                }
                sibling_counters.pop();
                parents.pop();
                if let Node::Element(el) = node.value() {
                    if skip_depth > 0 {
                        skip_depth -= 1;
                        continue;
                    }
                    if html_named(el, TEXT_HIDING) {
                        hidden_depth -= 1;
                    }
                    if opts.unwrap_annotations && is_annotation(el) {
                        continue;
                    }
                    emit(Event::Close(el));
                }
            }
        }
    }
}

/// Serializes `html`, handing every visible text node to `visible_text` so
/// the caller can interleave annotation markup. Other nodes follow the
/// standard HTML fragment serialization rules.
pub(crate) fn serialize(
    html: &Html,
    opts: &WalkOptions,
    mut visible_text: impl FnMut(usize, &str, &mut String),
) -> String {
    let mut out = String::new();
    walk(html, opts, |event| match event {
        Event::Doctype(d) => {
            out.push_str("<!DOCTYPE ");
            out.push_str(d.name());
            out.push('>');
        }
        Event::Open(el, leading_newline) => {
            out.push('<');
            out.push_str(el.name());
            for (name, value) in el.attrs.iter() {
                out.push(' ');
                push_attr_name(&mut out, name);
                out.push_str("=\"");
                escape_into(&mut out, value, true);
                out.push('"');
            }
            out.push('>');
            if leading_newline {
                out.push('\n');
            }
        }
        Event::Close(el) => {
            if !(is_html(el) && VOID.contains(&el.name())) {
                out.push_str("</");
                out.push_str(el.name());
                out.push('>');
            }
        }
        Event::Text { text, run, raw, .. } => match run {
            Some(index) => visible_text(index, text, &mut out),
            None if raw => out.push_str(text),
            None => escape_into(&mut out, text, false),
        },
        Event::Comment(c) => {
            out.push_str("<!--");
            out.push_str(c);
            out.push_str("-->");
        }
    });
    out
}

fn push_attr_name(out: &mut String, name: &html5ever::QualName) {
    match &*name.ns {
        "" => {}
        "http://www.w3.org/XML/1998/namespace" => out.push_str("xml:"),
        "http://www.w3.org/2000/xmlns/" => {
            if &*name.local != "xmlns" {
                out.push_str("xmlns:");
            }
        }
        "http://www.w3.org/1999/xlink" => out.push_str("xlink:"),
        _ => {
            if let Some(prefix) = &name.prefix {
                out.push_str(prefix);
                out.push(':');
            }
        }
    }
    out.push_str(&name.local);
}

pub(crate) fn escape_into(out: &mut String, text: &str, attr: bool) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '\u{a0}' => out.push_str("&nbsp;"),
            '"' if attr => out.push_str("&quot;"),
            '<' if !attr => out.push_str("&lt;"),
            '>' if !attr => out.push_str("&gt;"),
            c => out.push(c),
        }
    }
}

/// Visible text of an HTML string with annotation wrappers treated as
/// transparent.
pub fn visible_text_of(html_text: &str) -> String {
    let tree = parse(html_text);
    let mut text = String::new();
    walk(
        &tree,
        &WalkOptions { skip_scripts: false, unwrap_annotations: true },
        |event| {
            if let Event::Text { text: t, run: Some(_), .. } = event {
                text.push_str(t);
            }
        },
    );
    text
}

/// Removes every `<mark class="lm-implicit|lm-explicit">` wrapper, keeping
/// its content.
pub fn strip_annotations(html_text: &str) -> String {
    let tree = parse(html_text);
    serialize(
        &tree,
        &WalkOptions { skip_scripts: false, unwrap_annotations: true },
        |_, text, out| escape_into(out, text, false),
    )
}

/// Class of an annotation wrapper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MarkClass {
    Implicit,
    Explicit,
}

/// A visible text node of an annotated document together with the
/// annotation wrappers around it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedText {
    pub text: String,
    /// Classes of the enclosing `lm-*` wrappers, outermost first.
    pub classes: Vec<MarkClass>,
    /// `data-lm-term` or `data-lm-id` of the innermost wrapper.
    pub label: Option<String>,
}

/// Visible text nodes of `html_text` in document order with their
/// annotation context.
pub fn annotated_text(html_text: &str) -> Vec<AnnotatedText> {
    let tree = parse(html_text);
    let mut stack: Vec<(MarkClass, String)> = Vec::new();
    let mut out = Vec::new();
    walk(
        &tree,
        &WalkOptions { skip_scripts: false, unwrap_annotations: false },
        |event| match event {
            Event::Open(el, _) if is_annotation(el) => {
                let (class, attr) = match el.attr("class") {
                    Some("lm-explicit") => (MarkClass::Explicit, "data-lm-id"),
                    _ => (MarkClass::Implicit, "data-lm-term"),
                };
                stack.push((class, el.attr(attr).unwrap_or_default().to_string()));
            }
            Event::Close(el) if is_annotation(el) => {
                stack.pop();
            }
            Event::Text { text, run: Some(_), .. } => out.push(AnnotatedText {
                text: text.to_string(),
                classes: stack.iter().map(|(c, _)| *c).collect(),
                label: stack.last().map(|(_, l)| l.clone()),
            }),
            _ => {}
        },
    );
    out
}
