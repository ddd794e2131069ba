use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixture_page(n: usize) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../fixtures/pages/p{n}.html"))
}

struct Env {
    dir: TempDir,
}

impl Env {
    fn new() -> Env {
        Env { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_string_lossy().into_owned()
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_livemark"))
            .env("LIVEMARK_STORE", self.path("store.json"))
            .env("LIVEMARK_CACHE", self.path("cache"))
            .env_remove("LIVEMARK_CRASH_POINT")
            .args(args)
            .output()
            .unwrap()
    }
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn annotate_prints_stats_and_writes_html() {
    let env = Env::new();
    let out = env.path("out.html");
    let page = fixture_page(1);
    let url = "http://fixtures.livemark.test/p1.html";

    let first = env.run(&["annotate", "--user", "nobody", "--url", url, "--file", page.to_str().unwrap(), "--out", &out]);
    assert!(first.status.success());
    assert_eq!(stdout(&first), format!("{url}\t0\t0\t0\n"));

    assert!(env.run(&["profile", "set", "--user", "u", "--keywords", "marking, implicit"]).status.success());
    assert!(env.run(&["mark", "add", "--user", "u", "--url", url, "--quote", "second visit"]).status.success());
    let run = env.run(&["annotate", "--user", "u", "--url", url, "--cache-mode", "offline", "--out", &out]);
    assert_eq!(stdout(&run), format!("{url}\t2\t0\t0\n"), "first visit ignores stored marks");
    let run = env.run(&["annotate", "--user", "u", "--url", url, "--cache-mode", "offline", "--out", &out]);
    assert_eq!(stdout(&run), format!("{url}\t2\t1\t0\n"));

    let html = std::fs::read_to_string(&out).unwrap();
    assert!(html.contains(r#"<mark class="lm-explicit" data-lm-id="m-000001">second visit</mark>"#));
    assert!(html.contains(r#"<mark class="lm-implicit" data-lm-term="marking">Marking</mark>"#));
}

#[test]
fn file_without_url_gets_a_localhost_identity() {
    let env = Env::new();
    let out = env.path("out.html");
    let run = env.run(&["annotate", "--user", "u", "--file", fixture_page(2).to_str().unwrap(), "--out", &out]);
    assert!(run.status.success());
    assert!(stdout(&run).starts_with("http://localhost/p2.html\t"));
}

#[test]
fn exit_codes() {
    let env = Env::new();
    let out = env.path("out.html");
    assert_eq!(env.run(&[]).status.code(), Some(1));
    assert_eq!(env.run(&["annotate", "--user", "u"]).status.code(), Some(1));
    assert_eq!(env.run(&["--help"]).status.code(), Some(0));
    assert_eq!(env.run(&["annotate", "--user", "u", "--url", "ftp://x/", "--out", &out]).status.code(), Some(1));
    assert_eq!(
        env.run(&["mark", "add", "--user", "u", "--url", "http://a.test/", "--quote", ""]).status.code(),
        Some(1)
    );
    assert_eq!(
        env.run(&["annotate", "--user", "u", "--url", "http://a.test/", "--cache-mode", "offline", "--out", &out])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        env.run(&["annotate", "--user", "u", "--file", &env.path("missing.html"), "--out", &out]).status.code(),
        Some(2)
    );

    std::fs::write(env.path("store.json"), "{not json").unwrap();
    assert_eq!(env.run(&["profile", "show", "--user", "u"]).status.code(), Some(3));
}

#[test]
fn flags_override_environment() {
    let env = Env::new();
    let other = env.path("other.json");
    assert!(env.run(&["--store", &other, "profile", "set", "--user", "u", "--keywords", "web"]).status.success());
    assert!(Path::new(&other).exists());
    assert!(!Path::new(&env.path("store.json")).exists());
}

#[test]
fn mark_list_and_delete() {
    let env = Env::new();
    let url = "http://a.test/page";
    let added = env.run(&["mark", "add", "--user", "u", "--url", url, "--quote", "q", "--prefix", "p "]);
    let mark: serde_json::Value = serde_json::from_slice(&added.stdout).unwrap();
    assert_eq!(mark["id"], "m-000001");
    assert_eq!(mark["prefix"], "p ");

    let listed: serde_json::Value = serde_json::from_slice(&env.run(&["mark", "list", "--user", "u", "--url", url]).stdout).unwrap();
    assert_eq!(listed.as_array().unwrap().len(), 1);
    assert!(env.run(&["mark", "delete", "--id", "m-000001"]).status.success());
    assert_eq!(env.run(&["mark", "delete", "--id", "m-000001"]).status.code(), Some(1));
}

#[test]
fn report_with_unfetchable_rows() {
    let env = Env::new();
    let list = env.path("urls.txt");
    std::fs::write(&list, "# none cached\nhttp://a.test/1\n\nhttp://a.test/2\n").unwrap();
    let run = env.run(&["report", "--users", "u1,u2", "--urls-file", &list, "--cache-mode", "offline"]);
    assert_eq!(run.status.code(), Some(2), "no row could be counted");
    assert_eq!(stdout(&run), "page\tu1:IM\tu1:EM\tu2:IM\tu2:EM\n1\tERR\tERR\tERR\tERR\n2\tERR\tERR\tERR\tERR\n");

    std::fs::write(&list, "# empty\n").unwrap();
    let run = env.run(&["report", "--users", "u1", "--urls-file", &list]);
    assert!(run.status.success());
    assert_eq!(stdout(&run), "page\tu1:IM\tu1:EM\n");
}
