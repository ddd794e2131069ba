//! HTTP facade over [`LiveMarker`].
//!
//! All endpoints live under `/api` and speak JSON. Errors are reported as
//! `{"error": "..."}` with a matching status code. Annotated HTML is only
//! ever returned inside a JSON document, never as a navigable page.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get};
use axum::{Json, Router};
use livemark_core::{
    normalize_url, CacheMode, ExplicitMark, FetchError, LiveMarkError, LiveMarker, MarkStats, NewMark,
    Profile, StoreError, UrlError,
};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;
use tower_http::set_header::SetResponseHeaderLayer;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    pub store: PathBuf,
    pub cache: PathBuf,
    /// Directory of web UI assets served at `/`.
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            log::error!("{}", self.message);
        }
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

impl From<LiveMarkError> for ApiError {
    fn from(e: LiveMarkError) -> Self {
        let status = match &e {
            LiveMarkError::Url(_) => StatusCode::BAD_REQUEST,
            LiveMarkError::Fetch(FetchError::NotCached(_)) => StatusCode::NOT_FOUND,
            LiveMarkError::Fetch(FetchError::FetchFailed { .. }) => StatusCode::BAD_GATEWAY,
            LiveMarkError::Fetch(FetchError::NotHtml { .. }) => StatusCode::UNSUPPORTED_MEDIA_TYPE,
            LiveMarkError::Store(StoreError::EmptyQuote) => StatusCode::BAD_REQUEST,
            LiveMarkError::Fetch(_) | LiveMarkError::Store(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<UrlError> for ApiError {
    fn from(e: UrlError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        LiveMarkError::from(e).into()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Clone)]
struct AppState {
    marker: Arc<LiveMarker>,
}

pub fn router(marker: Arc<LiveMarker>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/annotate", get(annotate))
        .route("/api/marks", get(list_marks).post(create_mark))
        .route("/api/marks/{id}", delete(delete_mark))
        .route("/api/profiles/{user}", get(get_profile).put(put_profile))
        .route("/api/stats", get(stats))
        .with_state(AppState { marker });
    let app = match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    app.layer(SetResponseHeaderLayer::overriding(
        header::X_CONTENT_TYPE_OPTIONS,
        HeaderValue::from_static("nosniff"),
    ))
    .layer(SetResponseHeaderLayer::if_not_present(
        header::REFERRER_POLICY,
        HeaderValue::from_static("same-origin"),
    ))
}

pub async fn serve(config: ServiceConfig) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let marker = Arc::new(LiveMarker::open(&config.store, &config.cache)?);
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    log::info!(
        "listening on {} (store {}, cache {})",
        listener.local_addr()?,
        config.store.display(),
        config.cache.display()
    );
    axum::serve(listener, router(marker, config.static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

async fn blocking<T: Send + 'static>(
    work: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(work)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

fn required<'a>(value: &'a Option<String>, name: &str) -> ApiResult<&'a str> {
    match value.as_deref() {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(ApiError::bad_request(format!("missing query parameter {name:?}"))),
    }
}

#[derive(Debug, Deserialize)]
struct AnnotateQuery {
    url: Option<String>,
    user: Option<String>,
    cache: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct AnnotateResponse {
    pub url: String,
    pub first_visit: bool,
    pub html: String,
    pub stats: MarkStats,
}

async fn annotate(State(state): State<AppState>, Query(q): Query<AnnotateQuery>) -> ApiResult<Json<AnnotateResponse>> {
    let url = normalize_url(required(&q.url, "url")?)?;
    let user = required(&q.user, "user")?.to_string();
    let mode: CacheMode = q.cache.as_deref().unwrap_or_default().parse().map_err(ApiError::bad_request)?;
    let annotation = blocking(move || Ok(state.marker.annotate(&user, &url, mode)?)).await?;
    Ok(Json(AnnotateResponse {
        url: annotation.url.to_string(),
        first_visit: annotation.first_visit,
        stats: annotation.page.stats,
        html: annotation.page.html,
    }))
}

#[derive(Debug, Deserialize)]
struct MarksQuery {
    user: Option<String>,
    url: Option<String>,
}

async fn list_marks(State(state): State<AppState>, Query(q): Query<MarksQuery>) -> ApiResult<Json<Vec<ExplicitMark>>> {
    let url = normalize_url(required(&q.url, "url")?)?;
    let user = required(&q.user, "user")?;
    Ok(Json(state.marker.store().get_marks(user, &url)))
}

#[derive(Debug, Deserialize)]
struct MarkBody {
    user: String,
    url: String,
    quote: String,
    #[serde(default)]
    prefix: String,
    #[serde(default)]
    suffix: String,
}

async fn create_mark(
    State(state): State<AppState>,
    body: Result<Json<MarkBody>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let Json(body) = body?;
    if body.user.is_empty() {
        return Err(ApiError::bad_request("user must not be empty"));
    }
    let mark = NewMark {
        user_id: body.user,
        url: normalize_url(&body.url)?,
        quote: body.quote,
        prefix: body.prefix,
        suffix: body.suffix,
    };
    let stored = blocking(move || Ok(state.marker.store().add_mark(mark)?)).await?;
    Ok((StatusCode::CREATED, Json(serde_json::json!({ "id": stored.mark_id }))))
}

async fn delete_mark(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    let removed = blocking(move || Ok(state.marker.store().delete_mark(&id)?)).await?;
    if removed {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::not_found("no such mark"))
    }
}

async fn get_profile(State(state): State<AppState>, Path(user): Path<String>) -> ApiResult<Json<Profile>> {
    state
        .marker
        .store()
        .profile(&user)
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("no profile for user {user:?}")))
}

#[derive(Debug, Deserialize)]
struct ProfileBody {
    keywords: Vec<String>,
}

async fn put_profile(
    State(state): State<AppState>,
    Path(user): Path<String>,
    body: Result<Json<ProfileBody>, JsonRejection>,
) -> ApiResult<Json<Profile>> {
    let Json(body) = body?;
    let profile = blocking(move || Ok(state.marker.store().put_profile(&user, &body.keywords)?)).await?;
    Ok(Json(profile))
}

#[derive(Debug, Deserialize)]
struct StatsQuery {
    user: Option<String>,
    urls: Option<String>,
}

/// One page of a stats response. Pages that could not be counted carry
/// `status` and `error` instead of counts.
#[derive(Debug, Serialize)]
pub struct StatsRow {
    pub url: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub implicit: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explicit: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<u16>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

async fn stats(State(state): State<AppState>, Query(q): Query<StatsQuery>) -> ApiResult<Json<serde_json::Value>> {
    let user = required(&q.user, "user")?.to_string();
    let urls: Vec<String> = q
        .urls
        .unwrap_or_default()
        .split(',')
        .map(str::trim)
        .filter(|u| !u.is_empty())
        .map(str::to_string)
        .collect();
    let rows = blocking(move || {
        let rows = urls
            .into_iter()
            .map(|raw| {
                let counted = normalize_url(&raw)
                    .map_err(LiveMarkError::from)
                    .and_then(|url| state.marker.page_stats(&user, &url, CacheMode::Offline));
                match counted {
                    Ok(s) => StatsRow {
                        url: raw,
                        implicit: Some(s.implicit_count),
                        explicit: Some(s.explicit_count),
                        status: None,
                        error: None,
                    },
                    Err(e) => {
                        let err = ApiError::from(e);
                        StatsRow {
                            url: raw,
                            implicit: None,
                            explicit: None,
                            status: Some(err.status.as_u16()),
                            error: Some(err.message),
                        }
                    }
                }
            })
            .collect::<Vec<_>>();
        Ok(rows)
    })
    .await?;
    Ok(Json(serde_json::json!({ "rows": rows })))
}
