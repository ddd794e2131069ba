//! Page identity.

use std::fmt;

use serde::{Deserialize, Serialize};
pub use url::Url;

use crate::error::UrlError;

/// An absolute HTTP(S) URL with lowercase scheme and host, no fragment and
/// no default port. Path and query are kept exactly as given.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NormalizedUrl(String);

impl NormalizedUrl {
    pub fn parse(raw: &str) -> Result<Self, UrlError> {
        normalize_url(raw)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NormalizedUrl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for NormalizedUrl {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for NormalizedUrl {
    type Error = UrlError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        normalize_url(&value)
    }
}

impl From<NormalizedUrl> for String {
    fn from(value: NormalizedUrl) -> Self {
        value.0
    }
}

impl std::str::FromStr for NormalizedUrl {
    type Err = UrlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        normalize_url(s)
    }
}

/// Normalizes `raw` into the page identity used for visits, marks and the
/// fetch cache.
///
/// The `url` crate lowercases the scheme and host and drops default ports
/// already. Path and query are copied from the raw input rather than from the
/// parsed form so that no percent-encoding or dot-segment rewriting leaks
/// into the identity.
pub fn normalize_url(raw: &str) -> Result<NormalizedUrl, UrlError> {
    let malformed = || UrlError::Malformed(raw.to_string());
    let trimmed = raw.trim();
    let parsed = Url::parse(trimmed).map_err(|_| malformed())?;
    if !matches!(parsed.scheme(), "http" | "https") {
        return Err(malformed());
    }
    let host = match parsed.host_str() {
        Some(h) if !h.is_empty() => h,
        _ => return Err(malformed()),
    };

    let scheme_end = trimmed.find("://").ok_or_else(malformed)? + 3;
    let after_scheme = &trimmed[scheme_end..];
    let authority_end = after_scheme
        .find(['/', '?', '#'])
        .unwrap_or(after_scheme.len());
    let mut rest = &after_scheme[authority_end..];
    if let Some(hash) = rest.find('#') {
        rest = &rest[..hash];
    }

    let mut out = String::with_capacity(trimmed.len());
    out.push_str(parsed.scheme());
    out.push_str("://");
    let authority = &after_scheme[..authority_end];
    if let Some(at) = authority.rfind('@') {
        out.push_str(&authority[..=at]);
    }
    out.push_str(host);
    if let Some(port) = parsed.port() {
        out.push(':');
        out.push_str(&port.to_string());
    }
    if rest.is_empty() || rest.starts_with('?') {
        out.push('/');
    }
    out.push_str(rest);
    Ok(NormalizedUrl(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowercases_and_strips() {
        let u = normalize_url("HTTP://Example.COM:80/a?q=1#frag").unwrap();
        assert_eq!(u.as_str(), "http://example.com/a?q=1");
    }

    #[test]
    fn identity_case() {
        assert_eq!(normalize_url("https://a.b/x").unwrap().as_str(), "https://a.b/x");
    }

    #[test]
    fn rejects_non_urls() {
        assert!(matches!(normalize_url("not a url"), Err(UrlError::Malformed(_))));
        assert!(normalize_url("ftp://example.com/").is_err());
        assert!(normalize_url("/relative/path").is_err());
        assert!(normalize_url("file:///tmp/x.html").is_err());
    }

    #[test]
    fn keeps_path_and_query_verbatim() {
        let u = normalize_url("https://EX.org:443/A/./b%7e/../C?Z=1&a=%20#x").unwrap();
        assert_eq!(u.as_str(), "https://ex.org/A/./b%7e/../C?Z=1&a=%20");
    }

    #[test]
    fn keeps_non_default_port_and_empty_path() {
        assert_eq!(normalize_url("http://h.io:8080").unwrap().as_str(), "http://h.io:8080/");
        assert_eq!(normalize_url("http://h.io?x").unwrap().as_str(), "http://h.io/?x");
        assert_eq!(normalize_url("https://h.io:443#top").unwrap().as_str(), "https://h.io/");
    }

    #[test]
    fn idempotent() {
        for raw in [
            "HTTP://Example.COM:80/a?q=1#frag",
            "https://user@Host.example:8443/p?q",
            "http://h.io",
        ] {
            let once = normalize_url(raw).unwrap();
            assert_eq!(normalize_url(once.as_str()).unwrap(), once);
        }
    }
}
