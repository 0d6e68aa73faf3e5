//! Invariant checks over segments, manifests and configs.
//!
//! Validation never fails; problems are collected as `(path, rule)` pairs.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::config::SessionConfig;
use super::envelope::SampleEnvelope;
use super::manifest::SessionManifest;
use super::payload::{Payload, Rect, Span, EEG_CHANNELS};
use super::segment::{segment_file_name, SegmentFile};
use super::stream::StreamId;
use super::version::check_version;

pub const SIMPLEX_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub rule: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, path: impl Into<String>, rule: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            rule: rule.into(),
        });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    pub fn has(&self, path_suffix: &str, rule: &str) -> bool {
        self.violations
            .iter()
            .any(|v| v.path.ends_with(path_suffix) && v.rule == rule)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}: {}", v.path, v.rule)?;
        }
        Ok(())
    }
}

/// Lowercases and collapses whitespace runs.
pub fn normalize_phrase(s: &str) -> String {
    s.split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

fn unit_range(r: &mut ValidationReport, path: String, v: f64) {
    if !v.is_finite() {
        r.push(path, "finite");
    } else if !(0.0..=1.0).contains(&v) {
        r.push(path, "range [0,1]");
    }
}

fn non_negative(r: &mut ValidationReport, path: String, v: f64) {
    if !v.is_finite() {
        r.push(path, "finite");
    } else if v < 0.0 {
        r.push(path, "non-negative");
    }
}

fn positive(r: &mut ValidationReport, path: String, v: f64) {
    if !v.is_finite() {
        r.push(path, "finite");
    } else if v <= 0.0 {
        r.push(path, "positive");
    }
}

fn span_order(r: &mut ValidationReport, path: String, span: &Span) {
    if span.start_ms > span.end_ms {
        r.push(path, "span order");
    }
}

fn rect_non_empty(r: &mut ValidationReport, path: String, rect: &Rect) {
    if rect.w == 0 || rect.h == 0 {
        r.push(path, "non-empty box");
    }
}

pub fn is_media_path(p: &str) -> bool {
    p.starts_with("media/") && !p.split('/').any(|c| c == ".." || c.is_empty())
}

/// Checks one payload; `path` points at the payload object.
pub fn validate_payload(payload: &Payload, path: &str, r: &mut ValidationReport) {
    let at = |field: &str| format!("{path}.{field}");
    match payload {
        Payload::EegRaw(p) => {
            if p.channels.len() != EEG_CHANNELS {
                r.push(at("channels"), "length 14");
            }
            for (i, v) in p.channels.iter().enumerate() {
                if !v.is_finite() {
                    r.push(at(&format!("channels[{i}]")), "finite");
                }
            }
        }
        Payload::Gsr(p) => positive(r, at("conductance_us"), p.conductance_us),
        Payload::ImageFrame(p) => {
            if p.width_px == 0 {
                r.push(at("width_px"), "positive");
            }
            if p.height_px == 0 {
                r.push(at("height_px"), "positive");
            }
            if !is_media_path(&p.media.relative_path) {
                r.push(at("media.relative_path"), "media path");
            }
            for (i, b) in p.blurred_regions.iter().enumerate() {
                if !b.fits_within(p.width_px, p.height_px) {
                    r.push(at(&format!("blurred_regions[{i}]")), "within frame");
                }
            }
        }
        Payload::AudioChunk(p) => {
            if p.duration_ms == 0 {
                r.push(at("duration_ms"), "positive");
            }
            if !is_media_path(&p.media.relative_path) {
                r.push(at("media.relative_path"), "media path");
            }
        }
        Payload::EegBandpower(p) => {
            if p.per_channel.len() != EEG_CHANNELS {
                r.push(at("per_channel"), "length 14");
            }
            for (i, ch) in p.per_channel.iter().enumerate() {
                for (name, v) in super::payload::BAND_NAMES.iter().zip(ch.as_array()) {
                    non_negative(r, at(&format!("per_channel[{i}].{name}")), v);
                }
            }
        }
        Payload::FacialExpression(p) => {
            unit_range(r, at("upper_face.power"), p.upper_face.power);
            unit_range(r, at("lower_face.power"), p.lower_face.power);
        }
        Payload::Cognition(p) => {
            for (name, v) in p.named() {
                unit_range(r, at(name), v);
            }
        }
        Payload::AudioText(p) => span_order(r, at("span"), &p.span),
        Payload::SpeechSentiment(p) => {
            let parts = [
                ("positive", p.positive),
                ("negative", p.negative),
                ("mixed", p.mixed),
                ("neutral", p.neutral),
            ];
            let mut finite = true;
            for (name, v) in parts {
                finite &= v.is_finite();
                non_negative(r, at(name), v);
            }
            if finite && (p.sum() - 1.0).abs() > SIMPLEX_TOLERANCE {
                r.push(path.to_string(), "simplex sum");
            }
        }
        Payload::DesReport(p) => span_order(r, at("span"), &p.span),
        Payload::ImageText(p) | Payload::ImageLabels(p) => {
            for (i, d) in p.detections.iter().enumerate() {
                unit_range(r, at(&format!("detections[{i}].confidence")), d.confidence);
                rect_non_empty(r, at(&format!("detections[{i}].box")), &d.bbox);
            }
        }
    }
}

/// Per-stream ordering state carried across a sequence of envelopes.
#[derive(Debug, Default, Clone)]
pub struct StreamCursor {
    last: BTreeMap<StreamId, (u64, u64)>,
    /// When set, each stream must start at seq 0.
    pub from_origin: bool,
}

impl StreamCursor {
    pub fn session() -> Self {
        StreamCursor {
            last: BTreeMap::new(),
            from_origin: true,
        }
    }

    pub fn check(&mut self, env: &SampleEnvelope, path: &str, r: &mut ValidationReport) {
        let stream = env.stream();
        match self.last.get(&stream) {
            Some(&(t, seq)) => {
                if env.t_ms < t {
                    r.push(format!("{path}.t_ms"), "non-decreasing t_ms");
                }
                if env.seq_in_stream != seq + 1 {
                    r.push(format!("{path}.seq_in_stream"), "gap-free seq");
                }
            }
            None => {
                if self.from_origin && env.seq_in_stream != 0 {
                    r.push(format!("{path}.seq_in_stream"), "gap-free seq");
                }
            }
        }
        self.last.insert(stream, (env.t_ms, env.seq_in_stream));
    }
}

/// Validates a segment in isolation.
pub fn validate_segment(seg: &SegmentFile) -> ValidationReport {
    let mut cursor = StreamCursor::default();
    validate_segment_with(seg, &mut cursor)
}

pub fn validate_segment_with(seg: &SegmentFile, cursor: &mut StreamCursor) -> ValidationReport {
    let mut r = ValidationReport::default();
    if let Err(e) = check_version(&seg.schema_version) {
        r.push("schema_version", format!("schema version: {e}"));
    }
    if seg.header.seq == 0 && !seg.header.prev_attestation.is_zero() {
        r.push("header.prev_attestation", "zero genesis");
    }
    let mut referenced = HashSet::new();
    for (i, env) in seg.samples.iter().enumerate() {
        let path = format!("samples[{i}]");
        validate_payload(&env.payload, &format!("{path}.payload"), &mut r);
        cursor.check(env, &path, &mut r);
        if let Some(m) = env.payload.media() {
            referenced.insert(&m.relative_path);
            if !seg.media.contains(m) {
                r.push(format!("{path}.payload.media"), "media listed");
            }
        }
    }
    let mut seen = HashSet::new();
    for (i, m) in seg.media.iter().enumerate() {
        if !is_media_path(&m.relative_path) {
            r.push(format!("media[{i}].relative_path"), "media path");
        }
        if !referenced.contains(&m.relative_path) {
            r.push(format!("media[{i}]"), "media referenced");
        }
        if !seen.insert(&m.relative_path) {
            r.push(format!("media[{i}]"), "unique path");
        }
    }
    r
}

pub fn validate_config(cfg: &SessionConfig) -> ValidationReport {
    let mut r = ValidationReport::default();
    if cfg.subject_id.trim().is_empty() {
        r.push("subject_id", "non-empty");
    }
    positive(&mut r, "eeg.rate".into(), cfg.eeg.rate);
    positive(&mut r, "image.rate".into(), cfg.image.rate);
    positive(&mut r, "gsr.rate".into(), cfg.gsr.rate);
    positive(&mut r, "headset.rate".into(), cfg.headset.rate);
    if cfg.audio.chunk_ms == 0 {
        r.push("audio.chunk_ms", "positive");
    }
    if cfg.band_power.window_samples < 16 {
        r.push("band_power.window_samples", "at least 16");
    }
    if cfg.band_power.hop_ms == 0 {
        r.push("band_power.hop_ms", "positive");
    }
    for id in StreamId::ALL {
        match cfg.streams.get(&id) {
            None => r.push(format!("streams.{id}"), "all streams"),
            Some(s) => non_negative(
                &mut r,
                format!("streams.{id}.target_kb_per_s"),
                s.target_kb_per_s,
            ),
        }
    }
    if cfg.rotation.max_bytes == 0 {
        r.push("rotation.max_bytes", "positive");
    }
    if cfg.rotation.max_duration_ms == 0 {
        r.push("rotation.max_duration_ms", "positive");
    }
    let start = normalize_phrase(&cfg.des.start);
    let end = normalize_phrase(&cfg.des.end);
    if start.is_empty() {
        r.push("des.start", "non-empty");
    }
    if end.is_empty() {
        r.push("des.end", "non-empty");
    }
    if !start.is_empty() && start == end {
        r.push("des.end", "distinct phrases");
    }
    r
}

pub fn validate_manifest(m: &SessionManifest) -> ValidationReport {
    let mut r = ValidationReport::default();
    if let Err(e) = check_version(&m.schema_version) {
        r.push("schema_version", format!("schema version: {e}"));
    }
    if m.subject_id.trim().is_empty() {
        r.push("subject_id", "non-empty");
    }
    if m.subject_id != m.config.subject_id {
        r.push("config.subject_id", "matches subject_id");
    }
    let mut paths = HashSet::new();
    for (i, s) in m.segments.iter().enumerate() {
        if s.seq != i as u64 {
            r.push(format!("segments[{i}].seq"), "contiguous seq");
        }
        if !paths.insert(s.file_path.as_str()) {
            r.push(format!("segments[{i}].file_path"), "unique path");
        }
        if s.file_path != format!("segments/{}", segment_file_name(s.seq)) {
            r.push(format!("segments[{i}].file_path"), "segment path");
        }
    }
    for v in validate_config(&m.config).violations {
        r.push(format!("config.{}", v.path), v.rule);
    }
    r
}

/// Which document a raw JSON value claims to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocumentKind {
    Segment,
    Manifest,
    Config,
}

fn decode<T: for<'de> Deserialize<'de>>(value: &serde_json::Value) -> Result<T, ValidationReport> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let mut r = ValidationReport::default();
        let path = e.path().to_string();
        r.push(
            if path == "." { String::new() } else { path },
            format!("decode: {}", e.into_inner()),
        );
        r
    })
}

/// Decodes a raw document and validates it; decode failures are reported
/// as violations rather than errors.
pub fn validate_json(kind: DocumentKind, value: &serde_json::Value) -> ValidationReport {
    match kind {
        DocumentKind::Segment => {
            decode::<SegmentFile>(value).map_or_else(|r| r, |s| validate_segment(&s))
        }
        DocumentKind::Manifest => {
            decode::<SessionManifest>(value).map_or_else(|r| r, |m| validate_manifest(&m))
        }
        DocumentKind::Config => {
            decode::<SessionConfig>(value).map_or_else(|r| r, |c| validate_config(&c))
        }
    }
}
