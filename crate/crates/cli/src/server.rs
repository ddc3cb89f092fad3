//! Stateless HTTP API over the analysis pipeline.

use axum::body::Bytes;
use axum::extract::Query;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use std::net::SocketAddr;
use std::str::FromStr;
use umbd_core::appio::{defaults_for, ENGINE_VERSION};
use umbd_core::scales::EffectKind;
use umbd_core::sensitivity::{parse_sweep_spec, sweep, SweepSpec};
use umbd_core::{parse_config, run_analysis, AnalysisConfig, Error};

/// Every response body: the result or the error, tagged with version and config hash.
#[derive(Debug, Serialize)]
pub struct Envelope<T> {
    pub engine_version: &'static str,
    pub config_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ErrorBody {
    pub kind: String,
    pub field: Option<String>,
    pub message: String,
}

pub fn status_of(e: &Error) -> StatusCode {
    match e {
        Error::Validation { .. } => StatusCode::BAD_REQUEST,
        Error::Domain { .. } => StatusCode::UNPROCESSABLE_ENTITY,
        Error::Computation(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

fn ok<T: Serialize>(hash: Option<String>, result: T) -> Response {
    let body = Envelope { engine_version: ENGINE_VERSION, config_hash: hash, result: Some(result), error: None };
    (StatusCode::OK, Json(body)).into_response()
}

fn fail(hash: Option<String>, e: Error) -> Response {
    let kind = match &e {
        Error::Validation { .. } => "validation",
        Error::Domain { .. } => "domain",
        Error::Computation(_) => "computation",
    };
    let message = match &e {
        Error::Validation { message, .. } | Error::Domain { message, .. } => message.clone(),
        Error::Computation(m) => m.clone(),
    };
    let body: Envelope<()> = Envelope {
        engine_version: ENGINE_VERSION,
        config_hash: hash,
        result: None,
        error: Some(ErrorBody { kind: kind.into(), field: e.field().map(str::to_string), message }),
    };
    (status_of(&e), Json(body)).into_response()
}

fn utf8(body: &Bytes) -> Result<&str, Error> {
    std::str::from_utf8(body).map_err(|e| Error::validation("", format!("body is not UTF-8: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, Error> + Send + 'static) -> Result<T, Error> {
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or_else(|e| Err(Error::Computation(format!("worker failed: {e}"))))
}

async fn analyze(body: Bytes) -> Response {
    let text = match utf8(&body) {
        Ok(t) => t.to_owned(),
        Err(e) => return fail(None, e),
    };
    // Hash of the document even when it later fails validation.
    let hash = serde_json::from_str::<AnalysisConfig>(&text).ok().map(|c| c.hash());
    match blocking(move || run_analysis(&parse_config(&text)?)).await {
        Ok(report) => {
            let h = Some(report.config_hash.clone());
            ok(h, report)
        }
        Err(e) => fail(hash, e),
    }
}

async fn sweep_handler(body: Bytes) -> Response {
    let text = match utf8(&body) {
        Ok(t) => t.to_owned(),
        Err(e) => return fail(None, e),
    };
    let hash = serde_json::from_str::<SweepSpec>(&text).ok().map(|s| s.config.hash());
    match blocking(move || sweep(&parse_sweep_spec(&text)?)).await {
        Ok(report) => {
            let h = Some(report.base_config_hash.clone());
            ok(h, report)
        }
        Err(e) => fail(hash, e),
    }
}

#[derive(Debug, Deserialize)]
struct DefaultsQuery {
    #[serde(rename = "type")]
    kind: Option<String>,
}

async fn defaults(Query(q): Query<DefaultsQuery>) -> Response {
    let Some(kind) = q.kind else {
        return fail(None, Error::validation("type", "query parameter `type` is required"));
    };
    match EffectKind::from_str(&kind) {
        Ok(k) => ok(None, defaults_for(k)),
        Err(e) => fail(None, e),
    }
}

#[derive(Debug, Serialize)]
struct Health {
    status: &'static str,
}

async fn health() -> Response {
    ok(None, Health { status: "ok" })
}

pub fn router() -> Router {
    Router::new()
        .route("/api/analyze", post(analyze))
        .route("/api/sweep", post(sweep_handler))
        .route("/api/defaults", get(defaults))
        .route("/api/health", get(health))
}

/// Serves [`router`] until interrupted.
pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("umbd {ENGINE_VERSION} listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router())
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
