//! HTTP handlers of the control API.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::ws::rejection::WebSocketUpgradeRejection;
use axum::extract::ws::{CloseFrame, Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures_util::{SinkExt, StreamExt};
use recorder_core::integrity::{verify_chain, AttestError, Verdict, VerifyError};
use recorder_core::model::validate::{is_media_path, validate_config};
use recorder_core::model::{
    parse_stream_list, ConsentRecord, Profile, SessionConfig, SessionManifest, StreamId,
};
use recorder_core::sim::{ClockMode, ScenarioScript};
use recorder_core::store::{
    paginate, project_with, projection_table, query, query_live, rate_report, Page, PageCursor,
    RateReport, SessionPaths,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use uuid::Uuid;

use crate::error::{decode_at, parse_body, ApiError};
use crate::live::{LiveHub, LiveStats, Subscription};
use crate::sessions::{parse_id, prefixed, store_error, Located, SessionRequest, SessionSummary};
use crate::AppState;

pub const DEFAULT_PAGE_LIMIT: usize = 1_000;
pub const MAX_PAGE_LIMIT: usize = 10_000;

type St = State<Arc<AppState>>;
type Params = Result<Query<HashMap<String, String>>, QueryRejection>;

/// Session-creation body. `config` falls back to the server defaults.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    #[serde(default)]
    config: Option<Value>,
    scenario: Value,
    #[serde(default)]
    clock: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Created {
    pub session_id: Uuid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionDetail {
    #[serde(flatten)]
    pub summary: SessionSummary,
    pub manifest: SessionManifest,
}

/// Real time is the default for sessions started over the API.
pub const DEFAULT_CLOCK: ClockMode = ClockMode::RealTime {
    step_ms: recorder_core::sim::DEFAULT_STEP_MS,
    speed: 1.0,
};

fn params(p: Params) -> Result<HashMap<String, String>, ApiError> {
    p.map(|Query(q)| q)
        .map_err(|e| ApiError::BadRequest(e.body_text()))
}

fn num<T: std::str::FromStr>(
    q: &HashMap<String, String>,
    key: &str,
) -> Result<Option<T>, ApiError> {
    q.get(key)
        .map(|v| v.parse().map_err(|_| ApiError::invalid(key, "number")))
        .transpose()
}

fn streams_param(q: &HashMap<String, String>) -> Result<Option<Vec<StreamId>>, ApiError> {
    q.get("streams")
        .map(|s| parse_stream_list(s).map_err(|e| ApiError::invalid("streams", e.to_string())))
        .transpose()
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(ApiError::internal)?
}

async fn create_session(
    State(st): St,
    bytes: Bytes,
) -> Result<(StatusCode, Json<Created>), ApiError> {
    let body: CreateBody = decode_at(parse_body(&bytes)?, "")?;
    let config = match body.config {
        Some(v) => decode_at::<SessionConfig>(v, "config")?,
        None => st.defaults.read().expect("config lock").clone(),
    };
    let r = validate_config(&config);
    if !r.is_empty() {
        return Err(ApiError::Invalid(prefixed("config", r)));
    }
    let scenario: ScenarioScript = decode_at(body.scenario, "scenario")?;
    let r = scenario.validate(&config);
    if !r.is_empty() {
        return Err(ApiError::Invalid(prefixed("scenario", r)));
    }
    let clock = match body.clock {
        Some(v) => decode_at(v, "clock")?,
        None => DEFAULT_CLOCK,
    };
    if let ClockMode::RealTime { speed, .. } = clock {
        if !(speed.is_finite() && speed > 0.0) {
            return Err(ApiError::invalid("clock.speed", "positive"));
        }
    }
    let registry = st.consent.read().expect("consent lock").clone();
    let req = SessionRequest {
        config,
        scenario,
        clock,
        registry,
        clients: None,
    };
    let st2 = st.clone();
    let entry = blocking(move || st2.sessions.start(req)).await?;
    log::info!("session {} started", entry.id);
    Ok((
        StatusCode::CREATED,
        Json(Created {
            session_id: entry.id,
        }),
    ))
}

async fn stop_session(
    State(st): St,
    Path(id): Path<String>,
) -> Result<Json<SessionSummary>, ApiError> {
    let id = parse_id(&id)?;
    let manifest = st.sessions.stop(id).await?;
    log::info!("session {id} stopped");
    let loc = st.sessions.locate(id)?;
    let (summary, _) = st.sessions.summary(&loc)?;
    debug_assert_eq!(summary.segments, manifest.segments.len());
    Ok(Json(summary))
}

async fn list_sessions(State(st): St) -> Result<Json<Vec<SessionSummary>>, ApiError> {
    blocking(move || st.sessions.list()).await.map(Json)
}

async fn get_session(
    State(st): St,
    Path(id): Path<String>,
) -> Result<Json<SessionDetail>, ApiError> {
    let loc = st.sessions.locate(parse_id(&id)?)?;
    let (summary, manifest) = st.sessions.summary(&loc)?;
    Ok(Json(SessionDetail { summary, manifest }))
}

async fn samples(State(st): St, Path(id): Path<String>, q: Params) -> Result<Json<Page>, ApiError> {
    let q = params(q)?;
    let streams = streams_param(&q)?.unwrap_or_else(|| StreamId::ALL.to_vec());
    let from_ms = num(&q, "from_ms")?.unwrap_or(0);
    let to_ms = num(&q, "to_ms")?.unwrap_or(u64::MAX);
    if from_ms > to_ms {
        return Err(ApiError::invalid("from_ms", "not after to_ms"));
    }
    let limit: usize = num(&q, "limit")?.unwrap_or(DEFAULT_PAGE_LIMIT);
    if !(1..=MAX_PAGE_LIMIT).contains(&limit) {
        return Err(ApiError::invalid(
            "limit",
            format!("range [1,{MAX_PAGE_LIMIT}]"),
        ));
    }
    let after: Option<PageCursor> = q
        .get("after")
        .map(|c| {
            c.parse().map_err(|e: recorder_core::store::BadCursor| {
                ApiError::invalid("after", e.to_string())
            })
        })
        .transpose()?;
    let loc = st.sessions.locate(parse_id(&id)?)?;
    blocking(move || {
        let items = match &loc {
            Located::Active(e) => query_live(&e.dir, &e.live, &streams, from_ms, to_ms),
            Located::Stored(dir) => query(dir, &streams, from_ms, to_ms),
        }
        .map_err(store_error)?;
        Ok(paginate(items, after, limit))
    })
    .await
    .map(Json)
}

async fn media(
    State(st): St,
    Path((id, rest)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let loc = st.sessions.locate(parse_id(&id)?)?;
    let rel = format!("media/{rest}");
    if !is_media_path(&rel) {
        return Err(ApiError::NotFound(rel));
    }
    let path = SessionPaths::new(loc.dir()).resolve(&rel);
    let bytes = match tokio::fs::read(&path).await {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(ApiError::NotFound(rel)),
        Err(e) => return Err(ApiError::internal(e)),
    };
    let mime = match path.extension().and_then(|e| e.to_str()) {
        Some("ppm") => "image/x-portable-pixmap",
        _ => "application/octet-stream",
    };
    Ok(([(header::CONTENT_TYPE, mime)], bytes).into_response())
}

async fn session_rate_report(
    State(st): St,
    Path(id): Path<String>,
) -> Result<Json<RateReport>, ApiError> {
    let loc = st.sessions.locate(parse_id(&id)?)?;
    let dir = loc.dir().to_path_buf();
    blocking(move || rate_report(&dir).map_err(store_error))
        .await
        .map(Json)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyResult {
    pub session_id: Uuid,
    #[serde(flatten)]
    pub verdict: Verdict,
}

async fn verify_session(
    State(st): St,
    Path(id): Path<String>,
) -> Result<Json<VerifyResult>, ApiError> {
    let session_id = parse_id(&id)?;
    let loc = st.sessions.locate(session_id)?;
    if loc.is_recording() {
        return Err(ApiError::Conflict(format!(
            "session {session_id} is still recording"
        )));
    }
    let dir = loc.dir().to_path_buf();
    let service = st.sessions_service();
    let verdict =
        blocking(move || verify_chain(&dir, service.as_ref()).map_err(verify_error)).await?;
    Ok(Json(VerifyResult {
        session_id,
        verdict,
    }))
}

fn verify_error(e: VerifyError) -> ApiError {
    match e {
        VerifyError::Service(AttestError::Unavailable(m)) => ApiError::Unavailable(m),
        other => ApiError::internal(other),
    }
}

async fn projections(State(st): St, q: Params) -> Result<Response, ApiError> {
    let q = params(q)?;
    let Some(target) = num::<f64>(&q, "target_gb")? else {
        return Ok(Json(projection_table()).into_response());
    };
    let mode = match q.get("mode").map(String::as_str) {
        None | Some("full") => Profile::Full,
        Some("text") => Profile::Text,
        Some(_) => return Err(ApiError::invalid("mode", "one of full, text")),
    };
    let config = st.defaults.read().expect("config lock").clone();
    let p = project_with(&config, target, mode)
        .map_err(|e| ApiError::invalid("target_gb", e.to_string()))?;
    Ok(Json(p).into_response())
}

async fn get_config(State(st): St) -> Json<SessionConfig> {
    Json(st.defaults.read().expect("config lock").clone())
}

async fn put_config(State(st): St, bytes: Bytes) -> Result<Json<SessionConfig>, ApiError> {
    let config: SessionConfig = decode_at(parse_body(&bytes)?, "")?;
    let r = validate_config(&config);
    if !r.is_empty() {
        return Err(ApiError::Invalid(r));
    }
    st.save_defaults(config.clone())?;
    Ok(Json(config))
}

async fn list_consent(State(st): St) -> Json<Vec<ConsentRecord>> {
    Json(
        st.consent
            .read()
            .expect("consent lock")
            .records()
            .cloned()
            .collect(),
    )
}

async fn add_consent(
    State(st): St,
    bytes: Bytes,
) -> Result<(StatusCode, Json<ConsentRecord>), ApiError> {
    let record: ConsentRecord = decode_at(parse_body(&bytes)?, "")?;
    st.update_consent(|r| {
        r.insert(record.clone())
            .map_err(|e| ApiError::Conflict(e.to_string()))
    })?;
    Ok((StatusCode::CREATED, Json(record)))
}

async fn delete_consent(
    State(st): St,
    Path(person): Path<String>,
) -> Result<Json<ConsentRecord>, ApiError> {
    st.update_consent(|r| {
        r.remove(&person)
            .map_err(|_| ApiError::NotFound(format!("consent for {person:?}")))
    })
    .map(Json)
}

async fn live(
    State(st): St,
    Path(id): Path<String>,
    q: Params,
    ws: Result<WebSocketUpgrade, WebSocketUpgradeRejection>,
) -> Result<Response, ApiError> {
    let q = params(q)?;
    let id = parse_id(&id)?;
    let streams: Option<HashSet<StreamId>> = streams_param(&q)?.map(|v| v.into_iter().collect());
    let entry = match st.sessions.locate(id)? {
        Located::Active(e) if e.is_recording() => e,
        _ => return Err(ApiError::Conflict(format!("session {id} is not recording"))),
    };
    let sub = entry
        .hub
        .subscribe(streams, st.live_capacity)
        .ok_or_else(|| ApiError::Conflict(format!("session {id} is not recording")))?;
    let ws = ws.map_err(|e| ApiError::BadRequest(e.body_text()))?;
    let hub = entry.hub.clone();
    Ok(ws.on_upgrade(move |socket| pump(socket, hub, sub)))
}

/// Sends one envelope per text frame. When the session ends the socket is
/// closed with this subscription's counters as the close reason.
async fn pump(socket: WebSocket, hub: Arc<LiveHub>, sub: Arc<Subscription>) {
    let (mut tx, mut rx) = socket.split();
    let mut reader = tokio::spawn(async move {
        while let Some(Ok(msg)) = rx.next().await {
            if matches!(msg, Message::Close(_)) {
                break;
            }
        }
    });
    loop {
        tokio::select! {
            env = sub.next() => match env {
                Some(env) => {
                    let text = serde_json::to_string(&env).expect("envelopes serialize");
                    if tx.send(Message::Text(text.into())).await.is_err() {
                        break;
                    }
                }
                None => {
                    let reason = close_reason(&sub.stats());
                    let _ = tx
                        .send(Message::Close(Some(CloseFrame { code: 1000, reason: reason.into() })))
                        .await;
                    break;
                }
            },
            _ = &mut reader => break,
        }
    }
    reader.abort();
    hub.unsubscribe(&sub);
}

pub fn close_reason(s: &LiveStats) -> String {
    serde_json::json!({"published": s.published, "delivered": s.delivered, "dropped": s.dropped})
        .to_string()
}

/// Bearer-token check. Browsers cannot set headers on WebSocket upgrades,
/// so `?token=` is accepted as well.
async fn require_token(State(st): St, req: Request, next: Next) -> Result<Response, ApiError> {
    if let Some(expected) = &st.token {
        let from_header = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        let from_query = req
            .uri()
            .query()
            .and_then(|q| q.split('&').find_map(|kv| kv.strip_prefix("token=")));
        let ok = [from_header, from_query]
            .into_iter()
            .flatten()
            .any(|t| constant_time_eq(t.as_bytes(), expected.as_bytes()));
        if !ok {
            return Err(ApiError::Unauthorized);
        }
    }
    Ok(next.run(req).await)
}

fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

/// All control-API routes, without static file serving.
pub fn api_router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/stop", post(stop_session))
        .route("/sessions/{id}/samples", get(samples))
        .route("/sessions/{id}/media/{*path}", get(media))
        .route("/sessions/{id}/rate-report", get(session_rate_report))
        .route("/sessions/{id}/verify", get(verify_session))
        .route("/projections", get(projections))
        .route("/config", get(get_config).put(put_config))
        .route("/consent", get(list_consent).post(add_consent))
        .route(
            "/consent/{person_id}",
            axum::routing::delete(delete_consent),
        )
        .route("/live/{id}", get(live))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token))
        .with_state(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_comparison() {
        assert!(constant_time_eq(b"abc", b"abc"));
        assert!(!constant_time_eq(b"abc", b"abd"));
        assert!(!constant_time_eq(b"abc", b"abcd"));
    }

    #[test]
    fn close_reason_is_small_json() {
        let s = LiveStats {
            subscribers: 1,
            published: u64::MAX,
            delivered: u64::MAX,
            dropped: u64::MAX,
        };
        let r = close_reason(&s);
        // Close-frame reasons are limited to 123 bytes.
        assert!(r.len() <= 123, "{}", r.len());
        let v: Value = serde_json::from_str(&r).unwrap();
        assert_eq!(v["dropped"], u64::MAX);
    }
}
