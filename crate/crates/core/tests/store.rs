use livemark_core::store::{CrashAction, CrashPoint};
use livemark_core::{normalize_url, NewMark, NormalizedUrl, Store, StoreError, StoreFile};
use tempfile::TempDir;

fn url(s: &str) -> NormalizedUrl {
    normalize_url(s).unwrap()
}

fn new_mark(user: &str, page: &str, quote: &str) -> NewMark {
    NewMark {
        user_id: user.into(),
        url: url(page),
        quote: quote.into(),
        prefix: "types of ".into(),
        suffix: " it would".into(),
    }
}

fn open(dir: &TempDir) -> Store {
    Store::open(dir.path().join("store.json")).unwrap()
}

#[test]
fn profile_put_replaces_and_folds() {
    let dir = TempDir::new().unwrap();
    let store = open(&dir);
    let p = store.put_profile("u1", ["Marking", "marking", "Ontology"]).unwrap();
    let entries: Vec<String> = p.keywords().iter().map(ToString::to_string).collect();
    assert_eq!(entries, ["marking", "ontology"]);

    store.put_profile("u1", ["information retrieval"]).unwrap();
    let p = store.profile("u1").unwrap();
    assert_eq!(p.keywords().len(), 1);
    assert_eq!(p.keywords()[0].len(), 2);

    assert!(store.put_profile("u2", Vec::<String>::new()).unwrap().is_empty());
    assert!(store.profile("nobody").is_none());
}

#[test]
fn marks_round_trip_and_filtering() {
    let dir = TempDir::new().unwrap();
    let store = open(&dir);
    let a = url("http://example.com/a");
    assert!(store.get_marks("u1", &a).is_empty());

    let m1 = store.add_mark(new_mark("u1", "http://example.com/a", "implicit feedback")).unwrap();
    assert_eq!(m1.mark_id, "m-000001");
    store.add_mark(new_mark("u1", "http://example.com/b", "other page")).unwrap();
    store.add_mark(new_mark("u2", "http://example.com/a", "other user")).unwrap();
    assert_eq!(store.get_marks("u1", &a), vec![m1.clone()]);

    // Identical content twice gives two marks.
    let dup = store.add_mark(new_mark("u1", "http://example.com/a", "implicit feedback")).unwrap();
    assert_ne!(dup.mark_id, m1.mark_id);
    assert_eq!(store.get_marks("u1", &a).len(), 2);
}

#[test]
fn empty_quote_is_rejected() {
    let dir = TempDir::new().unwrap();
    let store = open(&dir);
    let err = store.add_mark(new_mark("u1", "http://example.com/a", "")).unwrap_err();
    assert!(matches!(err, StoreError::EmptyQuote));
    assert!(!dir.path().join("store.json").exists());
}

#[test]
fn delete_semantics() {
    let dir = TempDir::new().unwrap();
    let store = open(&dir);
    let m = store.add_mark(new_mark("u1", "http://example.com/a", "q")).unwrap();
    assert!(store.delete_mark(&m.mark_id).unwrap());
    assert!(store.get_marks("u1", &m.url).is_empty());
    assert!(!store.delete_mark(&m.mark_id).unwrap());
    assert!(!store.delete_mark("m-424242").unwrap());
}

#[test]
fn ids_stay_unique_after_deletes() {
    let dir = TempDir::new().unwrap();
    let store = open(&dir);
    let a = store.add_mark(new_mark("u1", "http://example.com/a", "a")).unwrap();
    let b = store.add_mark(new_mark("u1", "http://example.com/a", "b")).unwrap();
    store.delete_mark(&a.mark_id).unwrap();
    let c = store.add_mark(new_mark("u1", "http://example.com/a", "c")).unwrap();
    assert_ne!(c.mark_id, b.mark_id);
    let ids: std::collections::HashSet<_> = store.snapshot().marks.iter().map(|m| m.mark_id.clone()).collect();
    assert_eq!(ids.len(), store.snapshot().marks.len());
}

#[test]
fn context_is_clamped() {
    let dir = TempDir::new().unwrap();
    let store = open(&dir);
    let mut m = new_mark("u1", "http://example.com/a", "q");
    m.prefix = "p".repeat(50);
    m.suffix = "s".repeat(50);
    let stored = store.add_mark(m).unwrap();
    assert_eq!(stored.prefix.len(), 32);
    assert_eq!(stored.suffix.len(), 32);
}

#[test]
fn visits_are_idempotent() {
    let dir = TempDir::new().unwrap();
    let store = open(&dir);
    let a = url("http://example.com/a");
    assert!(!store.has_visited("u1", &a));
    assert!(store.record_visit("u1", &a).unwrap());
    assert!(!store.record_visit("u1", &a).unwrap());
    assert!(store.has_visited("u1", &a));
    assert!(!store.has_visited("u2", &a));
    assert_eq!(store.snapshot().visits.len(), 1);
}

#[test]
fn mutations_survive_restart() {
    let dir = TempDir::new().unwrap();
    let a = url("http://example.com/a");
    let id = {
        let store = open(&dir);
        store.put_profile("u1", ["marking"]).unwrap();
        store.record_visit("u1", &a).unwrap();
        let id = store.add_mark(new_mark("u1", "http://example.com/a", "q")).unwrap().mark_id;
        // No orderly shutdown.
        std::mem::forget(store);
        id
    };
    let store = open(&dir);
    assert_eq!(store.get_marks("u1", &a)[0].mark_id, id);
    assert!(store.has_visited("u1", &a));
    assert_eq!(store.profile("u1").unwrap().keywords().len(), 1);
}

#[test]
fn crash_before_rename_keeps_previous_state() {
    let dir = TempDir::new().unwrap();
    let a = url("http://example.com/a");
    let store = open(&dir);
    let kept = store.add_mark(new_mark("u1", "http://example.com/a", "kept")).unwrap();
    store.set_crash_point(Some((CrashPoint::BeforeRename, CrashAction::Fail)));
    assert!(store.add_mark(new_mark("u1", "http://example.com/a", "lost")).is_err());
    assert!(dir.path().join("store.json.tmp").exists());
    drop(store);

    let reopened = open(&dir);
    assert_eq!(reopened.get_marks("u1", &a), vec![kept]);
    assert!(!dir.path().join("store.json.tmp").exists());
    // The counter continues from what is on disk.
    let next = reopened.add_mark(new_mark("u1", "http://example.com/a", "next")).unwrap();
    assert_eq!(next.mark_id, "m-000002");
}

#[test]
fn crash_after_rename_keeps_new_state() {
    let dir = TempDir::new().unwrap();
    let a = url("http://example.com/a");
    let store = open(&dir);
    store.set_crash_point(Some((CrashPoint::AfterRename, CrashAction::Fail)));
    assert!(store.add_mark(new_mark("u1", "http://example.com/a", "durable")).is_err());
    drop(store);
    let reopened = open(&dir);
    assert_eq!(reopened.get_marks("u1", &a)[0].quote, "durable");
}

#[test]
fn documented_schema_parses_and_reserializes() {
    let doc = r#"{"version":1,"profiles":[{"user":"u1","keywords":["marking","information retrieval"]}],"marks":[{"id":"m-000001","user":"u1","url":"http://example.com/a","quote":"implicit feedback","prefix":"types of ","suffix":" it would","created_at":"2024-01-01T00:00:00Z"}],"visits":[{"user":"u1","url":"http://example.com/a","first_seen_at":"2024-01-01T00:00:00Z"}]}"#;
    let path = std::path::Path::new("store.json");
    let file = StoreFile::from_slice(doc.as_bytes(), path).unwrap();
    assert_eq!(String::from_utf8(file.to_vec()).unwrap(), doc);
    let again = StoreFile::from_slice(&file.to_vec(), path).unwrap();
    assert_eq!(again, file);
}

#[test]
fn rejects_corrupt_and_future_files() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("store.json");
    std::fs::write(&path, b"{not json").unwrap();
    assert!(matches!(Store::open(&path), Err(StoreError::Corrupt { .. })));
    std::fs::write(&path, br#"{"version":2,"profiles":[],"marks":[],"visits":[]}"#).unwrap();
    assert!(matches!(Store::open(&path), Err(StoreError::UnsupportedVersion(2))));
}

#[test]
fn concurrent_writers_do_not_lose_marks() {
    let dir = TempDir::new().unwrap();
    let store = std::sync::Arc::new(open(&dir));
    let handles: Vec<_> = (0..8)
        .map(|t| {
            let store = store.clone();
            std::thread::spawn(move || {
                for i in 0..10 {
                    store.add_mark(new_mark("u1", "http://example.com/a", &format!("t{t} q{i}"))).unwrap();
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    drop(store);
    let reopened = open(&dir);
    assert_eq!(reopened.get_marks("u1", &url("http://example.com/a")).len(), 80);
}
