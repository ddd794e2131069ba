//! Byte-to-text decoding for fetched pages.
//!
//! Order of precedence: byte order mark, charset parameter of the transport
//! media type, `<meta>` declaration in the first 1024 bytes, then UTF-8.
//! Undecodable sequences become U+FFFD, so decoding never fails.

use encoding_rs::{Encoding, UTF_16BE, UTF_16LE, UTF_8};

const PRESCAN_LIMIT: usize = 1024;

pub fn sniff_encoding(bytes: &[u8], media_type: Option<&str>) -> &'static Encoding {
    if let Some((enc, _)) = Encoding::for_bom(bytes) {
        return enc;
    }
    if let Some(enc) = media_type.and_then(charset_param).and_then(label_to_encoding) {
        return enc;
    }
    if let Some(enc) = prescan_meta(&bytes[..bytes.len().min(PRESCAN_LIMIT)]) {
        // A document that can be read as ASCII cannot really be UTF-16.
        if enc == UTF_16BE || enc == UTF_16LE {
            return UTF_8;
        }
        return enc;
    }
    UTF_8
}

pub fn decode(bytes: &[u8], media_type: Option<&str>) -> (String, &'static Encoding) {
    let enc = sniff_encoding(bytes, media_type);
    let (text, used, _had_errors) = enc.decode(bytes);
    (text.into_owned(), used)
}

fn label_to_encoding(label: &str) -> Option<&'static Encoding> {
    Encoding::for_label(label.trim().as_bytes())
}

fn charset_param(media_type: &str) -> Option<&str> {
    media_type.split(';').skip(1).find_map(|param| {
        let (name, value) = param.split_once('=')?;
        name.trim()
            .eq_ignore_ascii_case("charset")
            .then(|| value.trim().trim_matches(['"', '\'']))
    })
}

fn prescan_meta(head: &[u8]) -> Option<&'static Encoding> {
    let lower: Vec<u8> = head.to_ascii_lowercase();
    let mut pos = 0;
    while let Some(found) = find(&lower[pos..], b"<meta") {
        let tag_start = pos + found + 5;
        let tag_end = find(&lower[tag_start..], b">").map_or(lower.len(), |e| tag_start + e);
        let tag = &lower[tag_start..tag_end];
        if let Some(enc) = charset_in_tag(tag) {
            return Some(enc);
        }
        pos = tag_end;
    }
    None
}

fn charset_in_tag(tag: &[u8]) -> Option<&'static Encoding> {
    let at = find(tag, b"charset")?;
    let mut rest = &tag[at + 7..];
    rest = trim_ascii_start(rest);
    rest = rest.strip_prefix(b"=")?;
    rest = trim_ascii_start(rest);
    let rest = rest.strip_prefix(b"\"").or_else(|| rest.strip_prefix(b"'")).unwrap_or(rest);
    let end = rest
        .iter()
        .position(|b| matches!(b, b'"' | b'\'' | b';' | b'/' | b' ' | b'\t' | b'\n' | b'\r'))
        .unwrap_or(rest.len());
    Encoding::for_label(&rest[..end])
}

fn trim_ascii_start(s: &[u8]) -> &[u8] {
    let skip = s.iter().take_while(|b| b.is_ascii_whitespace()).count();
    &s[skip..]
}

fn find(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack.windows(needle.len()).position(|w| w == needle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use encoding_rs::WINDOWS_1252;

    #[test]
    fn defaults_to_utf8() {
        assert_eq!(sniff_encoding(b"<p>hi</p>", None), UTF_8);
    }

    #[test]
    fn meta_charset_forms() {
        assert_eq!(sniff_encoding(b"<meta charset=\"iso-8859-1\"><p>x", None), WINDOWS_1252);
        let http_equiv = b"<META http-equiv=Content-Type content='text/html; charset=windows-1252'>";
        assert_eq!(sniff_encoding(http_equiv, None), WINDOWS_1252);
    }

    #[test]
    fn transport_charset_beats_meta() {
        let bytes = b"<meta charset=utf-8><p>caf\xe9</p>";
        let (text, enc) = decode(bytes, Some("text/html; charset=ISO-8859-1"));
        assert_eq!(enc, WINDOWS_1252);
        assert!(text.contains("caf\u{e9}"));
    }

    #[test]
    fn bom_wins() {
        let mut bytes = vec![0xEF, 0xBB, 0xBF];
        bytes.extend_from_slice(b"<meta charset=latin1>x");
        assert_eq!(sniff_encoding(&bytes, Some("text/html; charset=latin1")), UTF_8);
    }

    #[test]
    fn invalid_utf8_is_replaced() {
        let (text, _) = decode(b"<p>a\xffb</p>", None);
        assert!(text.contains("a\u{fffd}b"));
    }

    #[test]
    fn meta_utf16_means_utf8() {
        assert_eq!(sniff_encoding(b"<meta charset=utf-16>", None), UTF_8);
    }
}
