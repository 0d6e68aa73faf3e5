//! JSON Schema documents for control-API and attestation request and
//! response bodies. Persisted documents are referenced by their `$id`.

use std::collections::BTreeMap;

use recorder_core::model::schema::{document, ID_BASE};
use recorder_core::model::StreamId;
use serde_json::{json, Value};

fn uint() -> Value {
    json!({"type": "integer", "minimum": 0})
}

fn uuid() -> Value {
    json!({"type": "string", "format": "uuid"})
}

fn hex() -> Value {
    json!({"type": "string", "pattern": "^[0-9a-f]{64}$"})
}

fn core(name: &str) -> Value {
    json!({"$ref": format!("{ID_BASE}/{name}")})
}

fn obj(props: Value, required: &[&str]) -> Value {
    json!({
        "type": "object",
        "properties": props,
        "required": required,
        "additionalProperties": false
    })
}

fn clock() -> Value {
    json!({"oneOf": [
        obj(json!({"mode": {"const": "virtual"}, "step_ms": {"type": "integer", "minimum": 1}}), &["mode", "step_ms"]),
        obj(json!({
            "mode": {"const": "real_time"},
            "step_ms": {"type": "integer", "minimum": 1},
            "speed": {"type": "number", "exclusiveMinimum": 0}
        }), &["mode", "step_ms", "speed"]),
    ]})
}

fn live_stats() -> Value {
    obj(
        json!({"subscribers": uint(), "published": uint(), "delivered": uint(), "dropped": uint()}),
        &["subscribers", "published", "delivered", "dropped"],
    )
}

fn summary() -> Value {
    obj(
        json!({
            "session_id": uuid(),
            "subject_id": {"type": "string"},
            "status": {"enum": ["recording", "closed", "incomplete"]},
            "started_at": {"type": "string", "format": "date-time"},
            "duration_ms": uint(),
            "segments": uint(),
            "unattested": uint(),
            "unanalyzed": uint(),
            "quarantined": uint(),
            "error": {"type": "string"},
            "live": live_stats()
        }),
        &[
            "session_id",
            "subject_id",
            "status",
            "started_at",
            "duration_ms",
            "segments",
            "unattested",
            "unanalyzed",
            "quarantined",
        ],
    )
}

fn cursor() -> Value {
    let streams: Vec<&str> = StreamId::ALL.iter().map(|s| s.as_str()).collect();
    json!({"type": "string", "pattern": format!("^[0-9]+\\.({})\\.[0-9]+$", streams.join("|"))})
}

fn verdict() -> Value {
    json!({"oneOf": [
        obj(json!({"session_id": uuid(), "verdict": {"const": "valid"}}), &["session_id", "verdict"]),
        obj(
            json!({"session_id": uuid(), "verdict": {"enum": ["tampered_at", "gap_at"]}, "seq": uint()}),
            &["session_id", "verdict", "seq"]
        ),
    ]})
}

fn error_body() -> Value {
    obj(
        json!({
            "error": {"enum": ["not_found", "conflict", "invalid", "bad_request", "unauthorized", "unavailable", "internal"]},
            "message": {"type": "string"},
            "report": obj(
                json!({"violations": {"type": "array", "items": obj(
                    json!({"path": {"type": "string"}, "rule": {"type": "string"}}),
                    &["path", "rule"]
                )}}),
                &["violations"]
            )
        }),
        &["error", "message"],
    )
}

fn number() -> Value {
    json!({"type": "number"})
}

fn projection() -> Value {
    let mode = json!({"enum": ["full", "text"]});
    obj(
        json!({"target_gb": {"type": "number", "exclusiveMinimum": 0}, "mode": mode, "daily_gb": number(), "days": number()}),
        &["target_gb", "mode", "daily_gb", "days"],
    )
}

fn projection_table() -> Value {
    json!({"type": "array", "items": obj(
        json!({
            "target_gb": number(), "mode": {"enum": ["full", "text"]}, "days": number(),
            "reference_days": number(), "relative_error": number()
        }),
        &["target_gb", "mode", "days", "reference_days", "relative_error"]
    )})
}

fn rate_report() -> Value {
    let rate = obj(
        json!({
            "samples": uint(), "envelope_bytes": uint(), "overhead_bytes": uint(),
            "media_bytes": uint(), "total_bytes": uint(), "kb_per_s": number()
        }),
        &[
            "samples",
            "envelope_bytes",
            "overhead_bytes",
            "media_bytes",
            "total_bytes",
            "kb_per_s",
        ],
    );
    let streams: Vec<&str> = StreamId::ALL.iter().map(|s| s.as_str()).collect();
    obj(
        json!({
            "session_id": uuid(),
            "duration_ms": uint(),
            "streams": {"type": "object", "propertyNames": {"enum": streams}, "additionalProperties": rate},
            "unattributed_bytes": uint(), "segment_bytes": uint(), "media_bytes": uint(), "total_bytes": uint(),
            "total_kb_per_s": number(), "text_kb_per_s": number(),
            "full_gb_per_day": number(), "text_gb_per_day": number()
        }),
        &[
            "session_id",
            "duration_ms",
            "streams",
            "unattributed_bytes",
            "segment_bytes",
            "media_bytes",
            "total_bytes",
            "total_kb_per_s",
            "text_kb_per_s",
            "full_gb_per_day",
            "text_gb_per_day",
        ],
    )
}

fn server_config() -> Value {
    obj(
        json!({
            "listen": {"type": "string"},
            "data_dir": {"type": "string", "minLength": 1},
            "attestation_url": {"type": ["string", "null"]},
            "bearer_token": {"type": ["string", "null"]},
            "static_dir": {"type": ["string", "null"]},
            "live_queue_capacity": {"type": "integer", "minimum": 1}
        }),
        &["data_dir"],
    )
}

/// API documents keyed by relative file name, under `api/`.
pub fn api_schemas() -> BTreeMap<String, Value> {
    let docs = [
        (
            "create-session.request",
            "CreateSessionRequest",
            obj(
                json!({"config": core("config.schema.json"), "scenario": core("scenario.schema.json"), "clock": clock()}),
                &["scenario"],
            ),
        ),
        (
            "session-created",
            "SessionCreated",
            obj(json!({"session_id": uuid()}), &["session_id"]),
        ),
        ("session-summary", "SessionSummary", summary()),
        (
            "session-list",
            "SessionList",
            json!({"type": "array", "items": summary()}),
        ),
        ("session-detail", "SessionDetail", {
            let mut s = summary();
            s["properties"]["manifest"] = core("manifest.schema.json");
            s["required"]
                .as_array_mut()
                .expect("required list")
                .push(json!("manifest"));
            s
        }),
        (
            "samples-page",
            "SamplesPage",
            obj(
                json!({
                    "items": {"type": "array", "items": core("envelope.schema.json")},
                    "next": {"oneOf": [cursor(), {"type": "null"}]}
                }),
                &["items", "next"],
            ),
        ),
        ("verify-result", "VerifyResult", verdict()),
        ("rate-report", "RateReport", rate_report()),
        ("projection", "Projection", projection()),
        ("projection-table", "ProjectionTable", projection_table()),
        (
            "consent-list",
            "ConsentList",
            json!({"type": "array", "items": core("consent.schema.json")}),
        ),
        ("live-stats", "LiveStats", live_stats()),
        ("error", "ErrorBody", error_body()),
        (
            "attest.request",
            "AttestRequest",
            obj(
                json!({"session_id": uuid(), "seq": uint(), "h_hex": hex()}),
                &["session_id", "seq", "h_hex"],
            ),
        ),
        (
            "attest.response",
            "AttestResponse",
            obj(json!({"a_hex": hex()}), &["a_hex"]),
        ),
        (
            "verify.request",
            "VerifyRequest",
            obj(
                json!({"session_id": uuid(), "seq": uint(), "h_hex": hex(), "next_prev_attestation_hex": hex()}),
                &["session_id", "seq", "h_hex", "next_prev_attestation_hex"],
            ),
        ),
        (
            "verify.response",
            "VerifyResponse",
            obj(json!({"ok": {"type": "boolean"}}), &["ok"]),
        ),
        (
            "attestations",
            "AttestationList",
            json!({"type": "array", "items": obj(json!({"seq": uint(), "h_hex": hex(), "a_hex": hex()}), &["seq", "h_hex", "a_hex"])}),
        ),
        ("server-config", "ServerConfig", server_config()),
    ];
    docs.into_iter()
        .map(|(name, title, root)| {
            let file = format!("api/{name}.schema.json");
            (file.clone(), document(&file, title, root))
        })
        .collect()
}
