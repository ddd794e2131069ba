use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use livemark_core::{normalize_url, CacheMode, FetchError, Fetcher, NormalizedUrl};
use tempfile::TempDir;

/// Minimal HTTP/1.1 server: `/page` is html whose body changes per request,
/// `/png` is an image, anything else is 404.
fn serve() -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap() == 0 || line == "\r\n" {
                    break;
                }
            }
            let path = request_line.split_whitespace().nth(1).unwrap_or("/").to_string();
            let n = counter.fetch_add(1, Ordering::SeqCst);
            let (status, media, body) = match path.as_str() {
                "/page" => ("200 OK", "text/html; charset=utf-8", format!("<p>version {n}</p>")),
                "/png" => ("200 OK", "image/png", "\u{89}PNG".to_string()),
                _ => ("404 Not Found", "text/plain", "nope".to_string()),
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status}\r\nContent-Type: {media}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    (base, hits)
}

fn url(s: &str) -> NormalizedUrl {
    normalize_url(s).unwrap()
}

#[test]
fn offline_miss_is_not_cached() {
    let dir = TempDir::new().unwrap();
    let fetcher = Fetcher::new(dir.path()).unwrap();
    let err = fetcher.fetch(&url("http://nowhere.test/x"), CacheMode::Offline).unwrap_err();
    assert!(matches!(err, FetchError::NotCached(_)));
}

#[test]
fn refresh_then_prefer_cache() {
    let (base, hits) = serve();
    let dir = TempDir::new().unwrap();
    let fetcher = Fetcher::new(dir.path()).unwrap();
    let page = url(&format!("{base}/page"));

    let first = fetcher.fetch(&page, CacheMode::Refresh).unwrap();
    assert!(!first.from_cache);
    assert!(first.is_html());
    let second = fetcher.fetch(&page, CacheMode::PreferCache).unwrap();
    assert!(second.from_cache);
    assert_eq!(second.body, first.body);
    assert_eq!(second.media_type, "text/html; charset=utf-8");
    assert_eq!(hits.load(Ordering::SeqCst), 1);

    // Refresh always goes to the network and overwrites the cached copy.
    let third = fetcher.fetch(&page, CacheMode::Refresh).unwrap();
    assert_ne!(third.body, first.body);
    assert_eq!(fetcher.fetch(&page, CacheMode::Offline).unwrap().body, third.body);
}

#[test]
fn fragments_share_a_cache_entry() {
    let (base, hits) = serve();
    let dir = TempDir::new().unwrap();
    let fetcher = Fetcher::new(dir.path()).unwrap();
    fetcher.fetch(&url(&format!("{base}/page#one")), CacheMode::PreferCache).unwrap();
    let again = fetcher.fetch(&url(&format!("{base}/page#two")), CacheMode::PreferCache).unwrap();
    assert!(again.from_cache);
    assert_eq!(hits.load(Ordering::SeqCst), 1);
}

#[test]
fn http_errors_and_non_html() {
    let (base, _) = serve();
    let dir = TempDir::new().unwrap();
    let fetcher = Fetcher::new(dir.path()).unwrap();
    let err = fetcher.fetch(&url(&format!("{base}/missing")), CacheMode::Refresh).unwrap_err();
    assert!(matches!(err, FetchError::FetchFailed { .. }), "{err}");

    let png = fetcher.fetch(&url(&format!("{base}/png")), CacheMode::Refresh).unwrap();
    assert!(matches!(png.check_html(), Err(FetchError::NotHtml { .. })));

    let err = fetcher.fetch(&url("http://127.0.0.1:1/refused"), CacheMode::PreferCache).unwrap_err();
    assert!(matches!(err, FetchError::FetchFailed { .. }));
}

#[test]
fn local_file_ingestion_and_index_layout() {
    let dir = TempDir::new().unwrap();
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/pages/p1.html");
    let fetcher = Fetcher::new(dir.path()).unwrap();
    let page = url("http://fixtures.livemark.test/p1.html");
    let got = fetcher.ingest_file(&page, std::path::Path::new(fixture)).unwrap();
    assert_eq!(got.body, std::fs::read(fixture).unwrap());
    assert_eq!(got.media_type, "text/html");

    let index: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("index.json")).unwrap()).unwrap();
    let entry = &index[page.as_str()];
    let hash = entry["content_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(entry["fetched_at"].as_str().unwrap().ends_with('Z'));
    assert_eq!(std::fs::read(dir.path().join("objects").join(hash)).unwrap(), got.body);

    // A fresh fetcher sees the same cache.
    let reopened = Fetcher::new(dir.path()).unwrap();
    assert_eq!(reopened.fetch(&page, CacheMode::Offline).unwrap().body, got.body);

    let missing = fetcher.ingest_file(&page, std::path::Path::new("/no/such/file.html"));
    assert!(matches!(missing, Err(FetchError::FetchFailed { .. })));
}
