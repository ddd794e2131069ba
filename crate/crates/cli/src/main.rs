//! `livemark` command-line driver.
//!
//! Exit codes: 0 success, 1 usage, 2 fetch, 3 store.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use livemark_core::store::{CrashAction, CrashPoint};
use livemark_core::{
    normalize_url, parse_url_list, CacheMode, LiveMarkError, LiveMarker, NewMark, NormalizedUrl, Report,
    StoreError,
};
use livemark_service::ServiceConfig;

#[derive(Debug, Parser)]
#[command(name = "livemark", version, about = "Personalized implicit/explicit page marking")]
struct Cli {
    #[command(flatten)]
    paths: Paths,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Paths {
    /// Store file (profiles, marks, visits).
    #[arg(long, global = true, env = "LIVEMARK_STORE", default_value = "livemark-store.json")]
    store: PathBuf,
    /// Page cache directory.
    #[arg(long, global = true, env = "LIVEMARK_CACHE", default_value = "livemark-cache")]
    cache: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mark one page for a user and write the annotated HTML.
    Annotate {
        #[arg(long)]
        user: String,
        /// Page URL; with --file, the identity the file is cached under.
        #[arg(long, required_unless_present = "file")]
        url: Option<String>,
        /// Local HTML file to annotate instead of fetching.
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "cache-mode", default_value = "prefer-cache", value_parser = parse_mode)]
        cache_mode: CacheMode,
    },
    /// Print the page-by-user IM/EM matrix as TSV.
    Report {
        /// Comma-separated user ids, one IM/EM column pair each.
        #[arg(long, value_delimiter = ',', required = true)]
        users: Vec<String>,
        /// File with one page URL per line.
        #[arg(long = "urls-file")]
        urls_file: PathBuf,
        #[arg(long = "cache-mode", default_value = "prefer-cache", value_parser = parse_mode)]
        cache_mode: CacheMode,
    },
    #[command(subcommand)]
    Profile(ProfileCommand),
    #[command(subcommand)]
    Mark(MarkCommand),
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "LIVEMARK_ADDR", default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Web UI assets to serve at `/`.
        #[arg(long = "static-dir", env = "LIVEMARK_STATIC")]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum ProfileCommand {
    /// Replace a user's keywords.
    Set {
        #[arg(long)]
        user: String,
        /// Comma-separated keywords; phrases allowed.
        #[arg(long, allow_hyphen_values = true)]
        keywords: String,
    },
    Show {
        #[arg(long)]
        user: String,
    },
}

#[derive(Debug, Subcommand)]
enum MarkCommand {
    /// Store an explicit mark.
    Add {
        #[arg(long)]
        user: String,
        #[arg(long)]
        url: String,
        #[arg(long, allow_hyphen_values = true)]
        quote: String,
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        prefix: String,
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        suffix: String,
    },
    List {
        #[arg(long)]
        user: String,
        #[arg(long)]
        url: String,
    },
    Delete {
        #[arg(long)]
        id: String,
    },
}

fn parse_mode(s: &str) -> Result<CacheMode, String> {
    s.parse()
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Fetch(String),
    Store(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Fetch(_) => 2,
            Failure::Store(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Fetch(m) | Failure::Store(m) => m,
        }
    }
}

impl From<LiveMarkError> for Failure {
    fn from(e: LiveMarkError) -> Self {
        match e {
            LiveMarkError::Url(e) => Failure::Usage(e.to_string()),
            LiveMarkError::Fetch(e) => Failure::Fetch(e.to_string()),
            LiveMarkError::Store(e) => e.into(),
        }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::EmptyQuote => Failure::Usage(e.to_string()),
            other => Failure::Store(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("livemark: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn open(paths: &Paths) -> Result<LiveMarker, Failure> {
    let marker = LiveMarker::open(&paths.store, &paths.cache)?;
    if let Some(point) = crash_point_from_env() {
        marker.store().set_crash_point(Some((point, CrashAction::Abort)));
    }
    Ok(marker)
}

/// `LIVEMARK_CRASH_POINT` aborts the process inside the next store write.
/// Used by the durability tests.
fn crash_point_from_env() -> Option<CrashPoint> {
    match std::env::var("LIVEMARK_CRASH_POINT").ok()?.as_str() {
        "before-rename" => Some(CrashPoint::BeforeRename),
        "after-rename" => Some(CrashPoint::AfterRename),
        _ => None,
    }
}

fn url_arg(raw: &str) -> Result<NormalizedUrl, Failure> {
    normalize_url(raw).map_err(|e| Failure::Usage(e.to_string()))
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string(value).expect("records serialize"));
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Annotate { user, url, file, out, cache_mode } => {
            let marker = open(&cli.paths)?;
            let annotation = match (&file, &url) {
                (Some(path), url) => {
                    let identity = match url {
                        Some(u) => url_arg(u)?,
                        None => file_identity(path)?,
                    };
                    marker.annotate_file(&user, &identity, path)?
                }
                (None, Some(u)) => marker.annotate(&user, &url_arg(u)?, cache_mode)?,
                (None, None) => return Err(Failure::Usage("one of --url or --file is required".into())),
            };
            std::fs::write(&out, annotation.page.html.as_bytes())
                .map_err(|e| Failure::Store(format!("writing {}: {e}", out.display())))?;
            let s = annotation.stats();
            println!("{}\t{}\t{}\t{}", annotation.url, s.implicit_count, s.explicit_count, s.orphaned_count);
        }
        Command::Report { users, urls_file, cache_mode } => {
            let list = std::fs::read_to_string(&urls_file)
                .map_err(|e| Failure::Usage(format!("reading {}: {e}", urls_file.display())))?;
            let urls = parse_url_list(&list);
            let marker = open(&cli.paths)?;
            let report = Report::build(&marker, &users, &urls, cache_mode);
            print!("{}", report.to_tsv());
            for row in &report.rows {
                for (user, cell) in report.users.iter().zip(&row.cells) {
                    if let Err(e) = cell {
                        log::warn!("page {} for {user}: {e}", row.page_id);
                    }
                }
            }
            if !report.rows.is_empty() && !report.any_row_succeeded() {
                return Err(Failure::Fetch("no page could be counted".into()));
            }
        }
        Command::Profile(ProfileCommand::Set { user, keywords }) => {
            let marker = open(&cli.paths)?;
            let profile = marker.store().put_profile(&user, keywords.split(','))?;
            print_json(&profile);
        }
        Command::Profile(ProfileCommand::Show { user }) => {
            let marker = open(&cli.paths)?;
            match marker.store().profile(&user) {
                Some(p) => print_json(&p),
                None => return Err(Failure::Usage(format!("no profile for user {user:?}"))),
            }
        }
        Command::Mark(MarkCommand::Add { user, url, quote, prefix, suffix }) => {
            let url = url_arg(&url)?;
            if quote.is_empty() {
                return Err(StoreError::EmptyQuote.into());
            }
            let marker = open(&cli.paths)?;
            let mark = marker.store().add_mark(NewMark { user_id: user, url, quote, prefix, suffix })?;
            print_json(&mark);
        }
        Command::Mark(MarkCommand::List { user, url }) => {
            let url = url_arg(&url)?;
            let marker = open(&cli.paths)?;
            print_json(&marker.store().get_marks(&user, &url));
        }
        Command::Mark(MarkCommand::Delete { id }) => {
            let marker = open(&cli.paths)?;
            if !marker.store().delete_mark(&id)? {
                return Err(Failure::Usage(format!("no mark {id:?}")));
            }
        }
        Command::Serve { addr, static_dir } => {
            let config = ServiceConfig { addr, store: cli.paths.store, cache: cli.paths.cache, static_dir };
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Store(e.to_string()))?;
            runtime.block_on(livemark_service::serve(config)).map_err(|e| Failure::Store(e.to_string()))?;
        }
    }
    Ok(())
}

/// Page identity for a local file given without `--url`:
/// `http://localhost/<file name>`.
fn file_identity(path: &Path) -> Result<NormalizedUrl, Failure> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Failure::Usage(format!("cannot derive a url for {}", path.display())))?;
    let mut url = livemark_core::url::Url::parse("http://localhost/").expect("static url");
    url.path_segments_mut().expect("http url has a path").pop_if_empty().push(name);
    url_arg(url.as_str())
}
