//! JSON Schema (draft 2020-12) documents for every persisted file.
//!
//! Rules that span several fields use `x-` extension keywords:
//!
//! - `x-simplex`: listed number fields sum to 1 within `tolerance`
//! - `x-span-order`: `start_ms <= end_ms`
//! - `x-within-frame`: every `blurred_regions` box fits inside `width_px`/`height_px`
//! - `x-stream-order`: per stream, `t_ms` non-decreasing and `seq_in_stream` gap-free
//! - `x-media-consistent`: payload media refs and the segment `media` list coincide
//! - `x-contiguous-seq`: array items carry `seq` 0, 1, 2, ...
//! - `x-segment-path`: `file_path` is `segments/segment-<seq:06>.json`
//! - `x-unique-field`: the named field is unique across array items
//! - `x-distinct-phrases`: `start` and `end` differ after case/whitespace folding
//! - `x-subject-consistent`: `subject_id` equals `config.subject_id`
//!
//! Validators unaware of the extensions accept a superset of valid documents.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::stream::StreamId;
use super::validate::SIMPLEX_TOLERANCE;

const DRAFT: &str = "https://json-schema.org/draft/2020-12/schema";
pub const ID_BASE: &str = "https://schemas.first-person-recorder.dev/v1";

fn uint() -> Value {
    json!({"type": "integer", "minimum": 0})
}

fn unit() -> Value {
    json!({"type": "number", "minimum": 0, "maximum": 1})
}

fn obj(props: Value, required: &[&str]) -> Value {
    json!({
        "type": "object",
        "properties": props,
        "required": required,
        "additionalProperties": false
    })
}

fn digest_hex() -> Value {
    json!({"type": "string", "pattern": "^[0-9a-f]{64}$"})
}

fn string_enum(values: &[&str]) -> Value {
    json!({"type": "string", "enum": values})
}

/// Shared definitions referenced as `#/$defs/<name>`.
pub fn defs() -> BTreeMap<String, Value> {
    let mut d = BTreeMap::new();
    let mut put = |k: &str, v: Value| {
        d.insert(k.to_string(), v);
    };
    put("digest", digest_hex());
    put(
        "rect",
        obj(
            json!({"x": uint(), "y": uint(), "w": uint(), "h": uint()}),
            &["x", "y", "w", "h"],
        ),
    );
    put(
        "nonEmptyRect",
        obj(
            json!({
                "x": uint(), "y": uint(),
                "w": {"type": "integer", "minimum": 1},
                "h": {"type": "integer", "minimum": 1}
            }),
            &["x", "y", "w", "h"],
        ),
    );
    let mut span = obj(
        json!({"start_ms": uint(), "end_ms": uint()}),
        &["start_ms", "end_ms"],
    );
    span["x-span-order"] = json!(true);
    put("span", span);
    put(
        "mediaRef",
        obj(
            json!({
                "relative_path": {"type": "string", "pattern": "^media/([^/.][^/]*/)*[^/]+$"},
                "content_hash": {"$ref": "#/$defs/digest"},
                "byte_len": uint()
            }),
            &["relative_path", "content_hash", "byte_len"],
        ),
    );
    let finite_list14 =
        |item: Value| json!({"type": "array", "items": item, "minItems": 14, "maxItems": 14});
    put(
        "payload.eeg-raw",
        obj(
            json!({"channels": finite_list14(json!({"type": "number"}))}),
            &["channels"],
        ),
    );
    put(
        "payload.gsr",
        obj(
            json!({"conductance_us": {"type": "number", "exclusiveMinimum": 0}}),
            &["conductance_us"],
        ),
    );
    let mut frame = obj(
        json!({
            "media": {"$ref": "#/$defs/mediaRef"},
            "width_px": {"type": "integer", "minimum": 1},
            "height_px": {"type": "integer", "minimum": 1},
            "blurred_regions": {"type": "array", "items": {"$ref": "#/$defs/nonEmptyRect"}}
        }),
        &["media", "width_px", "height_px", "blurred_regions"],
    );
    frame["x-within-frame"] = json!(true);
    put("payload.image-frame", frame);
    put(
        "payload.audio-chunk",
        obj(
            json!({
                "media": {"$ref": "#/$defs/mediaRef"},
                "duration_ms": {"type": "integer", "minimum": 1}
            }),
            &["media", "duration_ms"],
        ),
    );
    let nn = json!({"type": "number", "minimum": 0});
    put(
        "bandPowers",
        obj(
            json!({"theta": nn, "alpha": nn, "beta_l": nn, "beta_h": nn, "gamma": nn}),
            &["theta", "alpha", "beta_l", "beta_h", "gamma"],
        ),
    );
    put(
        "payload.eeg-bandpower",
        obj(
            json!({"per_channel": finite_list14(json!({"$ref": "#/$defs/bandPowers"}))}),
            &["per_channel"],
        ),
    );
    put(
        "payload.facial-expression",
        obj(
            json!({
                "eye_action": string_enum(&["neutral", "blink", "wink-left", "wink-right", "look-left", "look-right"]),
                "upper_face": obj(
                    json!({"action": string_enum(&["neutral", "surprise", "frown"]), "power": unit()}),
                    &["action", "power"]),
                "lower_face": obj(
                    json!({"action": string_enum(&["neutral", "smile", "clench", "smirk-left", "smirk-right"]), "power": unit()}),
                    &["action", "power"])
            }),
            &["eye_action", "upper_face", "lower_face"],
        ),
    );
    const COG: [&str; 6] = [
        "engagement",
        "excitement",
        "stress",
        "relaxation",
        "interest",
        "focus",
    ];
    let cog_props: serde_json::Map<String, Value> =
        COG.iter().map(|k| (k.to_string(), unit())).collect();
    put("payload.cognition", obj(Value::Object(cog_props), &COG));
    put(
        "payload.audio-text",
        obj(
            json!({
                "text": {"type": "string"},
                "speaker": string_enum(&["wearer", "other"]),
                "span": {"$ref": "#/$defs/span"}
            }),
            &["text", "speaker", "span"],
        ),
    );
    let mut sentiment = obj(
        json!({
            "positive": nn, "negative": nn, "mixed": nn, "neutral": nn,
            "ref_transcript_seq": uint()
        }),
        &[
            "positive",
            "negative",
            "mixed",
            "neutral",
            "ref_transcript_seq",
        ],
    );
    sentiment["x-simplex"] = json!({
        "fields": ["positive", "negative", "mixed", "neutral"],
        "tolerance": SIMPLEX_TOLERANCE
    });
    put("payload.speech-sentiment", sentiment);
    put(
        "payload.des-report",
        obj(
            json!({
                "text": {"type": "string"},
                "span": {"$ref": "#/$defs/span"},
                "terminated": {"type": "boolean"}
            }),
            &["text", "span", "terminated"],
        ),
    );
    let detections = obj(
        json!({
            "detections": {"type": "array", "items": obj(
                json!({"value": {"type": "string"}, "confidence": unit(), "box": {"$ref": "#/$defs/nonEmptyRect"}}),
                &["value", "confidence", "box"])},
            "ref_frame_seq": uint()
        }),
        &["detections", "ref_frame_seq"],
    );
    put("payload.image-text", detections.clone());
    put("payload.image-labels", detections);

    let variants: Vec<Value> = StreamId::ALL
        .iter()
        .map(|id| {
            obj(
                json!({
                    "stream": {"const": id.as_str()},
                    "t_ms": uint(),
                    "seq_in_stream": uint(),
                    "payload": {"$ref": format!("#/$defs/payload.{}", id.as_str())}
                }),
                &["stream", "t_ms", "seq_in_stream", "payload"],
            )
        })
        .collect();
    put("envelope", json!({"oneOf": variants}));
    put(
        "schemaVersion",
        json!({"type": "string", "pattern": "^1\\.(0|[1-9][0-9]*)\\.(0|[1-9][0-9]*)$"}),
    );
    put("sessionConfig", config_schema_body());
    d
}

fn config_schema_body() -> Value {
    let rate = obj(
        json!({"rate": {"type": "number", "exclusiveMinimum": 0}}),
        &["rate"],
    );
    let stream_settings = obj(
        json!({"enabled": {"type": "boolean"}, "target_kb_per_s": {"type": "number", "minimum": 0}}),
        &["enabled", "target_kb_per_s"],
    );
    let names: Vec<&str> = StreamId::ALL.iter().map(|s| s.as_str()).collect();
    let stream_props: serde_json::Map<String, Value> = names
        .iter()
        .map(|n| (n.to_string(), stream_settings.clone()))
        .collect();
    let mut des = obj(
        json!({
            "start": {"type": "string", "pattern": "\\S"},
            "end": {"type": "string", "pattern": "\\S"}
        }),
        &["start", "end"],
    );
    des["x-distinct-phrases"] = json!(true);
    obj(
        json!({
            "subject_id": {"type": "string", "pattern": "\\S"},
            "eeg": rate, "image": rate, "gsr": rate, "headset": rate,
            "audio": obj(json!({"chunk_ms": {"type": "integer", "minimum": 1}}), &["chunk_ms"]),
            "band_power": obj(
                json!({"window_samples": {"type": "integer", "minimum": 16}, "hop_ms": {"type": "integer", "minimum": 1}}),
                &["window_samples", "hop_ms"]),
            "streams": obj(Value::Object(stream_props), &names),
            "rate_unit": string_enum(&["kilobytes", "kilobits"]),
            "rotation": obj(
                json!({"max_bytes": {"type": "integer", "minimum": 1}, "max_duration_ms": {"type": "integer", "minimum": 1}}),
                &["max_bytes", "max_duration_ms"]),
            "des": des,
            "blur": string_enum(&["pixelate", "fill"])
        }),
        &[
            "subject_id",
            "eeg",
            "image",
            "gsr",
            "headset",
            "audio",
            "band_power",
            "streams",
            "rate_unit",
            "rotation",
            "des",
            "blur",
        ],
    )
}

/// Wraps `root` as a standalone document with the shared `$defs`.
pub fn document(name: &str, title: &str, root: Value) -> Value {
    let mut doc = root;
    doc["$schema"] = json!(DRAFT);
    doc["$id"] = json!(format!("{ID_BASE}/{name}"));
    doc["title"] = json!(title);
    doc["$defs"] = Value::Object(defs().into_iter().collect());
    doc
}

pub fn segment_schema() -> Value {
    let zero = "0".repeat(64);
    let mut root = obj(
        json!({
            "schema_version": {"$ref": "#/$defs/schemaVersion"},
            "header": {
                "type": "object",
                "properties": {"seq": uint(), "prev_attestation": {"$ref": "#/$defs/digest"}},
                "required": ["seq", "prev_attestation"],
                "additionalProperties": false,
                "if": {"properties": {"seq": {"const": 0}}},
                "then": {"properties": {"prev_attestation": {"const": zero}}}
            },
            "samples": {
                "type": "array",
                "items": {"$ref": "#/$defs/envelope"},
                "x-stream-order": {"from_origin": false}
            },
            "media": {"type": "array", "items": {"$ref": "#/$defs/mediaRef"}, "x-unique-field": "relative_path"}
        }),
        &["schema_version", "header", "samples", "media"],
    );
    root["x-media-consistent"] = json!(true);
    document("segment.schema.json", "SegmentFile", root)
}

pub fn manifest_schema() -> Value {
    let mut root = obj(
        json!({
            "schema_version": {"$ref": "#/$defs/schemaVersion"},
            "session_id": {"type": "string", "pattern": "^[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{12}$"},
            "subject_id": {"type": "string", "pattern": "\\S"},
            "started_at": {"type": "string", "format": "date-time"},
            "config": {"$ref": "#/$defs/sessionConfig"},
            "status": string_enum(&["recording", "closed", "incomplete"]),
            "duration_ms": uint(),
            "segments": {
                "type": "array",
                "items": obj(
                    json!({"seq": uint(), "file_path": {"type": "string"}, "byte_len": uint(), "attested": {"type": "boolean"}}),
                    &["seq", "file_path", "byte_len", "attested"]),
                "x-contiguous-seq": true,
                "x-segment-path": true,
                "x-unique-field": "file_path"
            },
            "unanalyzed": {"type": "array", "items": obj(
                json!({
                    "stream": string_enum(&StreamId::ALL.map(|s| s.as_str())),
                    "seq": uint(), "analyzer": {"type": "string"}, "reason": {"type": "string"}
                }),
                &["stream", "seq", "analyzer", "reason"])},
            "quarantined": {"type": "array", "items": obj(
                json!({"t_ms": uint(), "reason": {"type": "string"}}), &["t_ms", "reason"])}
        }),
        &[
            "schema_version",
            "session_id",
            "subject_id",
            "started_at",
            "config",
            "status",
            "duration_ms",
            "segments",
        ],
    );
    root["x-subject-consistent"] = json!(true);
    document("manifest.schema.json", "SessionManifest", root)
}

pub fn config_schema() -> Value {
    document(
        "config.schema.json",
        "SessionConfig",
        json!({"$ref": "#/$defs/sessionConfig"}),
    )
}

pub fn consent_schema() -> Value {
    document(
        "consent.schema.json",
        "ConsentRecord",
        obj(
            json!({
                "person_id": {"type": "string", "minLength": 1},
                "face_signature": {"type": "string", "minLength": 1},
                "scope": {"oneOf": [
                    {"const": "global"},
                    obj(json!({"granted_to": {"type": "array", "items": {"type": "string"}}}), &["granted_to"])
                ]}
            }),
            &["person_id", "face_signature", "scope"],
        ),
    )
}

pub fn scenario_schema() -> Value {
    let norm_box = obj(
        json!({"x": unit(), "y": unit(), "w": unit(), "h": unit()}),
        &["x", "y", "w", "h"],
    );
    let event = |kind: &str, props: Value, required: &[&str]| {
        let mut p = props;
        p["kind"] = json!({"const": kind});
        p["at_ms"] = uint();
        let mut req: Vec<&str> = vec!["kind", "at_ms"];
        req.extend_from_slice(required);
        obj(p, &req)
    };
    let events = vec![
        event(
            "utterance",
            json!({"text": {"type": "string"}, "speaker": string_enum(&["wearer", "other"]), "duration_ms": {"type": "integer", "minimum": 1}}),
            &["text", "speaker"],
        ),
        event(
            "face",
            json!({"person_id": {"type": "string"}, "signature": {"type": "string"}, "box": norm_box, "span_ms": uint()}),
            &["person_id", "box", "span_ms"],
        ),
        event(
            "scene_text",
            json!({"value": {"type": "string"}, "box": norm_box, "span_ms": uint()}),
            &["value", "box", "span_ms"],
        ),
        event(
            "scene_object",
            json!({"label": {"type": "string"}, "box": norm_box, "span_ms": uint()}),
            &["label", "box", "span_ms"],
        ),
        event(
            "gsr_event",
            json!({"amplitude_us": {"type": "number", "minimum": 0}}),
            &["amplitude_us"],
        ),
        event(
            "eeg_tone",
            json!({
                "freq_hz": {"type": "number", "exclusiveMinimum": 0},
                "channels": {"type": "array", "items": {"type": "integer", "minimum": 0, "maximum": 13}},
                "span_ms": uint(),
                "amplitude_uv": {"type": "number", "minimum": 0}
            }),
            &["freq_hz", "channels", "span_ms"],
        ),
        event(
            "cognition_set",
            json!({"values": {"$ref": "#/$defs/payload.cognition"}, "span_ms": uint()}),
            &["values", "span_ms"],
        ),
        event(
            "expression_set",
            json!({"expression": {"$ref": "#/$defs/payload.facial-expression"}, "span_ms": uint()}),
            &["expression", "span_ms"],
        ),
    ];
    document(
        "scenario.schema.json",
        "ScenarioScript",
        obj(
            json!({
                "seed": uint(),
                "duration_ms": {"type": "integer", "minimum": 1},
                "eeg_noise_uv": {"type": "number", "minimum": 0},
                "gsr_baseline_us": {"type": "number", "minimum": 1, "maximum": 30},
                "gsr_walk_step_us": {"type": "number", "minimum": 0},
                "events": {"type": "array", "items": {"oneOf": events}}
            }),
            &["seed", "duration_ms", "events"],
        ),
    )
}

/// One schema per stream payload.
pub fn payload_schema(stream: StreamId) -> Value {
    document(
        &format!("payload/{}.schema.json", stream.as_str()),
        &format!("{} payload", stream.as_str()),
        json!({"$ref": format!("#/$defs/payload.{}", stream.as_str())}),
    )
}

pub fn envelope_schema() -> Value {
    document(
        "envelope.schema.json",
        "SampleEnvelope",
        json!({"$ref": "#/$defs/envelope"}),
    )
}

/// The full document set, keyed by relative file name.
pub fn dump_schemas() -> BTreeMap<String, Value> {
    let mut out = BTreeMap::new();
    out.insert("segment.schema.json".into(), segment_schema());
    out.insert("manifest.schema.json".into(), manifest_schema());
    out.insert("config.schema.json".into(), config_schema());
    out.insert("consent.schema.json".into(), consent_schema());
    out.insert("scenario.schema.json".into(), scenario_schema());
    out.insert("envelope.schema.json".into(), envelope_schema());
    for id in StreamId::ALL {
        out.insert(
            format!("payload/{}.schema.json", id.as_str()),
            payload_schema(id),
        );
    }
    out
}

/// Writes the document set under `dir`, creating subdirectories.
pub fn write_schemas(
    dir: &std::path::Path,
    docs: &BTreeMap<String, Value>,
) -> std::io::Result<Vec<std::path::PathBuf>> {
    let mut written = Vec::new();
    for (name, doc) in docs {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut text = serde_json::to_string_pretty(doc).expect("schema values serialize");
        text.push('\n');
        std::fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}
