//! Page-by-user IM/EM matrix, one row per page, two columns per user.

use std::fmt::Write as _;

use crate::engine::LiveMarker;
use crate::fetch::CacheMode;
use crate::render::MarkStats;
use crate::url::{normalize_url, NormalizedUrl};

pub const ERROR_CELL: &str = "ERR";

#[derive(Debug, Clone)]
pub struct ReportRow {
    /// 1-based position in the requested page list.
    pub page_id: usize,
    pub url: Result<NormalizedUrl, String>,
    /// One entry per user, in the requested user order.
    pub cells: Vec<Result<MarkStats, String>>,
}

impl ReportRow {
    pub fn succeeded(&self) -> bool {
        self.cells.iter().any(Result::is_ok)
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub users: Vec<String>,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn build(marker: &LiveMarker, users: &[String], urls: &[String], mode: CacheMode) -> Report {
        let rows = urls
            .iter()
            .enumerate()
            .map(|(i, raw)| {
                let url = normalize_url(raw).map_err(|e| e.to_string());
                let cells = users
                    .iter()
                    .map(|user| match &url {
                        Ok(u) => marker.page_stats(user, u, mode).map_err(|e| e.to_string()),
                        Err(e) => Err(e.clone()),
                    })
                    .collect();
                ReportRow { page_id: i + 1, url, cells }
            })
            .collect();
        Report { users: users.to_vec(), rows }
    }

    pub fn any_row_succeeded(&self) -> bool {
        self.rows.iter().any(ReportRow::succeeded)
    }

    /// Tab-separated matrix: `page`, then `<user>:IM` and `<user>:EM` for
    /// each user. Failed cells read `ERR`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("page");
        for user in &self.users {
            let _ = write!(out, "\t{user}:IM\t{user}:EM");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{}", row.page_id);
            for cell in &row.cells {
                match cell {
                    Ok(stats) => {
                        let _ = write!(out, "\t{}\t{}", stats.implicit_count, stats.explicit_count);
                    }
                    Err(_) => {
                        let _ = write!(out, "\t{ERROR_CELL}\t{ERROR_CELL}");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Reads a page list: one URL per line; blank lines and `#` comments are
/// skipped.
pub fn parse_url_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}
