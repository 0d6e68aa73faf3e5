//! Data-rate accounting and recording-time projection.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::model::{canonical, Profile, SessionConfig, StreamId, GB, RECORDING_DAY_S};

use super::layout::{dir_size, SessionPaths};
use super::query::{read_manifest, read_segment};
use super::writer::StoreError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StreamRate {
    pub samples: u64,
    /// Canonical envelope bytes inside segment files.
    pub envelope_bytes: u64,
    /// This stream's share of segment framing bytes.
    pub overhead_bytes: u64,
    pub media_bytes: u64,
    pub total_bytes: u64,
    pub kb_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub session_id: Uuid,
    pub duration_ms: u64,
    pub streams: BTreeMap<StreamId, StreamRate>,
    /// Framing bytes of segments that hold no samples, plus unreferenced
    /// media files.
    pub unattributed_bytes: u64,
    pub segment_bytes: u64,
    pub media_bytes: u64,
    pub total_bytes: u64,
    pub total_kb_per_s: f64,
    pub text_kb_per_s: f64,
    pub full_gb_per_day: f64,
    pub text_gb_per_day: f64,
}

/// Splits `total` across `weights` proportionally, largest remainder
/// first, so the parts sum to `total` exactly.
pub fn apportion(total: u64, weights: &[u64]) -> Vec<u64> {
    let sum: u64 = weights.iter().sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let mut parts: Vec<u64> = Vec::with_capacity(weights.len());
    let mut rems: Vec<(u128, usize)> = Vec::with_capacity(weights.len());
    for (i, &w) in weights.iter().enumerate() {
        let exact = total as u128 * w as u128;
        parts.push((exact / sum as u128) as u64);
        rems.push((exact % sum as u128, i));
    }
    let mut left = total - parts.iter().sum::<u64>();
    rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, i) in rems {
        if left == 0 {
            break;
        }
        parts[i] += 1;
        left -= 1;
    }
    parts
}

pub fn kb_per_s(bytes: u64, duration_ms: u64) -> f64 {
    if duration_ms == 0 {
        0.0
    } else {
        bytes as f64 / 1000.0 / (duration_ms as f64 / 1000.0)
    }
}

pub fn gb_per_day(kb_per_s: f64) -> f64 {
    kb_per_s * 1000.0 * RECORDING_DAY_S / GB
}

/// Measures what a stored session occupies on disk, per stream.
pub fn rate_report(dir: &Path) -> Result<RateReport, StoreError> {
    let manifest = read_manifest(dir)?;
    if manifest.duration_ms < 10_000 {
        log::warn!(
            "rate report over {} ms is not representative",
            manifest.duration_ms
        );
    }
    let paths = SessionPaths::new(dir);
    let mut streams: BTreeMap<StreamId, StreamRate> = BTreeMap::new();
    let mut unattributed = 0u64;
    let mut segment_bytes = 0u64;
    let mut media_seen = HashSet::new();
    let mut media_bytes = 0u64;

    for entry in &manifest.segments {
        let file_len = fs::metadata(paths.segment(entry.seq))?.len();
        segment_bytes += file_len;
        let seg = read_segment(dir, entry.seq)?;
        let mut stream_env: BTreeMap<StreamId, u64> = BTreeMap::new();
        for env in &seg.samples {
            // Each sample is followed by a comma or the closing bracket.
            let n = canonical::to_vec(env)?.len() as u64 + 1;
            let s = streams.entry(env.stream()).or_default();
            s.samples += 1;
            s.envelope_bytes += n;
            *stream_env.entry(env.stream()).or_default() += n;
            if let Some(m) = env.payload.media() {
                if media_seen.insert(m.relative_path.clone()) {
                    let len = fs::metadata(paths.resolve(&m.relative_path))?.len();
                    s.media_bytes += len;
                    media_bytes += len;
                }
            }
        }
        let env_total: u64 = stream_env.values().sum();
        let overhead = file_len.saturating_sub(env_total);
        if stream_env.is_empty() {
            unattributed += file_len;
            continue;
        }
        let ids: Vec<StreamId> = stream_env.keys().copied().collect();
        let weights: Vec<u64> = stream_env.values().copied().collect();
        for (id, share) in ids.into_iter().zip(apportion(overhead, &weights)) {
            streams.get_mut(&id).expect("present").overhead_bytes += share;
        }
        if env_total > file_len {
            return Err(StoreError::Corrupt(format!(
                "segment {} shorter than its samples",
                entry.seq
            )));
        }
    }
    // Media files nobody references still occupy the disk.
    let media_on_disk = dir_size(&paths.media_dir())?;
    unattributed += media_on_disk.saturating_sub(media_bytes);
    let media_total = media_bytes.max(media_on_disk);

    let duration = manifest.duration_ms;
    let mut total_kb = 0.0;
    let mut text_kb = 0.0;
    for (id, s) in streams.iter_mut() {
        s.total_bytes = s.envelope_bytes + s.overhead_bytes + s.media_bytes;
        s.kb_per_s = kb_per_s(s.total_bytes, duration);
        total_kb += s.kb_per_s;
        if Profile::Text.includes(*id) {
            text_kb += s.kb_per_s;
        }
    }
    let total_bytes = segment_bytes + media_total;
    Ok(RateReport {
        session_id: manifest.session_id,
        duration_ms: duration,
        streams,
        unattributed_bytes: unattributed,
        segment_bytes,
        media_bytes: media_total,
        total_bytes,
        total_kb_per_s: total_kb,
        text_kb_per_s: text_kb,
        full_gb_per_day: gb_per_day(total_kb),
        text_gb_per_day: gb_per_day(text_kb),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub target_gb: f64,
    pub mode: Profile,
    pub daily_gb: f64,
    pub days: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("target_gb must be a positive finite number, got {0}")]
pub struct BadTarget(pub f64);

/// Days of 16-hour recording needed to collect `target_gb` at the nominal
/// per-stream rates of `config`.
pub fn project_with(
    config: &SessionConfig,
    target_gb: f64,
    mode: Profile,
) -> Result<Projection, BadTarget> {
    if !(target_gb.is_finite() && target_gb > 0.0) {
        return Err(BadTarget(target_gb));
    }
    let daily_gb = config.nominal_daily_gb(mode);
    Ok(Projection {
        target_gb,
        mode,
        daily_gb,
        days: target_gb / daily_gb,
    })
}

pub fn project_recording_days(target_gb: f64, mode: Profile) -> Result<Projection, BadTarget> {
    project_with(&SessionConfig::default(), target_gb, mode)
}

/// Published day counts for three dataset sizes: (target GB, full, text).
pub const REFERENCE_PROJECTIONS: [(f64, f64, f64); 3] = [
    (5.0, 0.14, 6.5),
    (40.0, 1.1, 52.0),
    (46_080.0, 1_300.0, 60_000.0),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRow {
    pub target_gb: f64,
    pub mode: Profile,
    pub days: f64,
    pub reference_days: f64,
    /// `days / reference_days - 1`.
    pub relative_error: f64,
}

/// All six reference cells, computed.
pub fn projection_table() -> Vec<ProjectionRow> {
    let mut out = Vec::new();
    for (gb, full, text) in REFERENCE_PROJECTIONS {
        for (mode, reference) in [(Profile::Full, full), (Profile::Text, text)] {
            let days = project_recording_days(gb, mode)
                .expect("positive target")
                .days;
            out.push(ProjectionRow {
                target_gb: gb,
                mode,
                days,
                reference_days: reference,
                relative_error: days / reference - 1.0,
            });
        }
    }
    out
}
