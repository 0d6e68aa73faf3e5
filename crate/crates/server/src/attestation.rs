//! HTTP face of the attestation service, and a client that speaks it.
//!
//! Hex strings are lowercase, 64 characters. Nonces never appear in any
//! request or response.

use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use recorder_core::integrity::{AttestError, AttestationService, AttestationView};
use recorder_core::model::Digest32;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::error::{decode_at, parse_body};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttestRequest {
    pub session_id: Uuid,
    pub seq: u64,
    pub h_hex: Digest32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttestResponse {
    pub a_hex: Digest32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyRequest {
    pub session_id: Uuid,
    pub seq: u64,
    pub h_hex: Digest32,
    pub next_prev_attestation_hex: Digest32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyResponse {
    pub ok: bool,
}

/// Error body; `seq` and `last` carry the ordering details.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttestErrorBody {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last: Option<u64>,
}

struct ServiceError(AttestErrorBody, StatusCode);

impl From<AttestError> for ServiceError {
    fn from(e: AttestError) -> Self {
        let message = e.to_string();
        let (code, status, seq, last) = match e {
            AttestError::OutOfOrder { seq, last } => {
                ("out_of_order", StatusCode::CONFLICT, Some(seq), Some(last))
            }
            AttestError::Conflict(seq) => ("conflict", StatusCode::CONFLICT, Some(seq), None),
            AttestError::Unavailable(_) => {
                ("unavailable", StatusCode::SERVICE_UNAVAILABLE, None, None)
            }
            AttestError::Internal(_) => ("internal", StatusCode::INTERNAL_SERVER_ERROR, None, None),
        };
        ServiceError(
            AttestErrorBody {
                error: code.into(),
                message,
                seq,
                last,
            },
            status,
        )
    }
}

impl ServiceError {
    fn invalid(message: String) -> Self {
        ServiceError(
            AttestErrorBody {
                error: "invalid".into(),
                message,
                seq: None,
                last: None,
            },
            StatusCode::UNPROCESSABLE_ENTITY,
        )
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (self.1, Json(self.0)).into_response()
    }
}

type Svc = Arc<dyn AttestationService>;

fn body<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T, ServiceError> {
    parse_body(bytes)
        .and_then(|v| decode_at(v, ""))
        .map_err(|e| ServiceError::invalid(e.to_string()))
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, AttestError> + Send + 'static,
) -> Result<T, ServiceError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::from(AttestError::Internal(e.to_string())))?
        .map_err(ServiceError::from)
}

async fn attest(
    State(svc): State<Svc>,
    bytes: Bytes,
) -> Result<Json<AttestResponse>, ServiceError> {
    let req: AttestRequest = body(&bytes)?;
    let a = blocking(move || svc.attest(req.session_id, req.seq, req.h_hex)).await?;
    Ok(Json(AttestResponse { a_hex: a }))
}

async fn verify(
    State(svc): State<Svc>,
    bytes: Bytes,
) -> Result<Json<VerifyResponse>, ServiceError> {
    let req: VerifyRequest = body(&bytes)?;
    let ok = blocking(move || {
        svc.verify(
            req.session_id,
            req.seq,
            req.h_hex,
            req.next_prev_attestation_hex,
        )
    })
    .await?;
    Ok(Json(VerifyResponse { ok }))
}

async fn attestations(
    State(svc): State<Svc>,
    Path(id): Path<String>,
) -> Result<Json<Vec<AttestationView>>, ServiceError> {
    let id: Uuid = id
        .parse()
        .map_err(|_| ServiceError::invalid(format!("bad session id {id:?}")))?;
    Ok(Json(blocking(move || svc.attestations(id)).await?))
}

/// Routes of the standalone attestation service.
pub fn attestation_router(service: Arc<dyn AttestationService>) -> Router {
    Router::new()
        .route("/attest", post(attest))
        .route("/verify", post(verify))
        .route("/sessions/{id}/attestations", get(attestations))
        .with_state(service)
}

/// Blocking client for a remote attestation service.
#[derive(Debug, Clone)]
pub struct HttpAttestationClient {
    base: String,
    agent: ureq::Agent,
}

impl HttpAttestationClient {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self::with_timeout(base_url, Duration::from_secs(10))
    }

    pub fn with_timeout(base_url: impl Into<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpAttestationClient {
            base: base_url.into().trim_end_matches('/').to_string(),
            agent,
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn decode<T: serde::de::DeserializeOwned>(
        mut resp: ureq::http::Response<ureq::Body>,
    ) -> Result<T, AttestError> {
        let status = resp.status();
        if status.is_success() {
            return resp
                .body_mut()
                .read_json()
                .map_err(|e| AttestError::Internal(format!("bad response: {e}")));
        }
        let err: Option<AttestErrorBody> = resp.body_mut().read_json().ok();
        let message = err
            .as_ref()
            .map_or_else(|| status.to_string(), |b| b.message.clone());
        Err(match err {
            Some(b) if b.error == "out_of_order" => AttestError::OutOfOrder {
                seq: b.seq.unwrap_or_default(),
                last: b.last.unwrap_or_default(),
            },
            Some(b) if b.error == "conflict" => AttestError::Conflict(b.seq.unwrap_or_default()),
            _ if status == 503 => AttestError::Unavailable(message),
            _ => AttestError::Internal(message),
        })
    }

    fn unreachable(e: ureq::Error) -> AttestError {
        AttestError::Unavailable(e.to_string())
    }
}

impl AttestationService for HttpAttestationClient {
    fn attest(&self, session: Uuid, seq: u64, h: Digest32) -> Result<Digest32, AttestError> {
        let resp = self
            .agent
            .post(&format!("{}/attest", self.base))
            .send_json(AttestRequest {
                session_id: session,
                seq,
                h_hex: h,
            })
            .map_err(Self::unreachable)?;
        Self::decode::<AttestResponse>(resp).map(|r| r.a_hex)
    }

    fn verify(
        &self,
        session: Uuid,
        seq: u64,
        h: Digest32,
        next_prev: Digest32,
    ) -> Result<bool, AttestError> {
        let resp = self
            .agent
            .post(&format!("{}/verify", self.base))
            .send_json(VerifyRequest {
                session_id: session,
                seq,
                h_hex: h,
                next_prev_attestation_hex: next_prev,
            })
            .map_err(Self::unreachable)?;
        Self::decode::<VerifyResponse>(resp).map(|r| r.ok)
    }

    fn attestations(&self, session: Uuid) -> Result<Vec<AttestationView>, AttestError> {
        let resp = self
            .agent
            .get(&format!("{}/sessions/{session}/attestations", self.base))
            .call()
            .map_err(Self::unreachable)?;
        Self::decode(resp)
    }
}
