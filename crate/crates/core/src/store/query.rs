//! Playback queries over sealed segments and the live buffer.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{SampleEnvelope, SegmentFile, SessionManifest, StreamId};

use super::layout::SessionPaths;
use super::writer::{LiveHandle, StoreError};

/// Position after which a page starts, in merge order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PageCursor {
    pub t_ms: u64,
    pub stream: StreamId,
    pub seq: u64,
}

impl PageCursor {
    pub fn of(env: &SampleEnvelope) -> Self {
        let (t_ms, stream, seq) = env.order_key();
        PageCursor { t_ms, stream, seq }
    }
}

impl fmt::Display for PageCursor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.t_ms, self.stream, self.seq)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed page cursor {0:?}")]
pub struct BadCursor(pub String);

impl FromStr for PageCursor {
    type Err = BadCursor;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BadCursor(s.to_string());
        let mut parts = s.splitn(3, '.');
        let t_ms = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let stream = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let seq = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        Ok(PageCursor { t_ms, stream, seq })
    }
}

impl Serialize for PageCursor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PageCursor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Page {
    pub items: Vec<SampleEnvelope>,
    pub next: Option<PageCursor>,
}

/// Splits an ordered result into one page of at most `limit` items.
pub fn paginate(items: Vec<SampleEnvelope>, after: Option<PageCursor>, limit: usize) -> Page {
    let start = match after {
        Some(c) => items.partition_point(|e| PageCursor::of(e) <= c),
        None => 0,
    };
    let limit = limit.max(1);
    let end = (start + limit).min(items.len());
    let next = (end < items.len()).then(|| PageCursor::of(&items[end - 1]));
    Page {
        items: items[start..end].to_vec(),
        next,
    }
}

pub fn read_manifest(dir: &Path) -> Result<SessionManifest, StoreError> {
    let paths = SessionPaths::new(dir);
    let bytes = match fs::read(paths.manifest()) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(StoreError::NotFound(dir.display().to_string()))
        }
        Err(e) => return Err(e.into()),
    };
    SessionManifest::decode(&bytes).map_err(|e| StoreError::Corrupt(format!("manifest: {e}")))
}

pub fn read_segment(dir: &Path, seq: u64) -> Result<SegmentFile, StoreError> {
    let bytes = fs::read(SessionPaths::new(dir).segment(seq))?;
    SegmentFile::decode(&bytes).map_err(|e| StoreError::Corrupt(format!("segment {seq}: {e}")))
}

fn select(
    envs: impl IntoIterator<Item = SampleEnvelope>,
    streams: &[StreamId],
    from_ms: u64,
    to_ms: u64,
    out: &mut Vec<SampleEnvelope>,
) {
    out.extend(
        envs.into_iter()
            .filter(|e| streams.contains(&e.stream()) && e.t_ms >= from_ms && e.t_ms < to_ms),
    );
}

/// Envelopes of `streams` with `from_ms <= t_ms < to_ms` from a stored
/// session, in `(t_ms, stream, seq)` order.
pub fn query(
    dir: &Path,
    streams: &[StreamId],
    from_ms: u64,
    to_ms: u64,
) -> Result<Vec<SampleEnvelope>, StoreError> {
    let manifest = read_manifest(dir)?;
    let mut out = Vec::new();
    if from_ms < to_ms {
        for entry in &manifest.segments {
            select(
                read_segment(dir, entry.seq)?.samples,
                streams,
                from_ms,
                to_ms,
                &mut out,
            );
        }
    }
    out.sort_by_key(|e| e.order_key());
    Ok(out)
}

/// Like [`query`] for a session that may still be recording.
pub fn query_live(
    dir: &Path,
    live: &LiveHandle,
    streams: &[StreamId],
    from_ms: u64,
    to_ms: u64,
) -> Result<Vec<SampleEnvelope>, StoreError> {
    let mut out = Vec::new();
    if from_ms < to_ms {
        // Holding the read lock keeps rotation from moving samples between
        // the buffer and a file mid-query.
        let state = live.read().expect("live lock");
        for &seq in &state.sealed {
            select(
                read_segment(dir, seq)?.samples,
                streams,
                from_ms,
                to_ms,
                &mut out,
            );
        }
        select(
            state.open.iter().cloned(),
            streams,
            from_ms,
            to_ms,
            &mut out,
        );
    }
    out.sort_by_key(|e| e.order_key());
    Ok(out)
}
