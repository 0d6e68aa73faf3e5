//! Session writer: buffers envelopes, rotates hash-chained segments.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::Path;
use std::sync::{Arc, RwLock};

use chrono::{DateTime, Utc};
use uuid::Uuid;

use crate::integrity::{hash_segment, AttestationService};
use crate::model::canonical::{self, CanonicalError};
use crate::model::validate::{validate_payload, StreamCursor, ValidationReport};
use crate::model::{
    Digest32, MediaRef, QuarantineMarker, SampleEnvelope, SegmentEntry, SegmentFile, SessionConfig,
    SessionManifest, SessionStatus, UnanalyzedMarker,
};

use super::layout::{write_atomic, SessionPaths};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("storage I/O failed: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
    #[error("rejected envelope: {0}")]
    Invalid(ValidationReport),
    #[error("media bytes do not match their reference {0}")]
    MediaMismatch(String),
    #[error("session is no longer open")]
    Closed,
    #[error("session {0} not found")]
    NotFound(String),
    #[error("corrupt session data: {0}")]
    Corrupt(String),
}

/// Sealed segments plus the open buffer, shared with live readers.
#[derive(Debug, Default)]
pub struct LiveState {
    pub sealed: Vec<u64>,
    pub open: Vec<SampleEnvelope>,
    pub closed: bool,
}

pub type LiveHandle = Arc<RwLock<LiveState>>;

pub struct SessionWriter {
    paths: SessionPaths,
    manifest: SessionManifest,
    service: Arc<dyn AttestationService>,
    open: SegmentFile,
    open_bytes: u64,
    open_first_t: Option<u64>,
    media_on_disk: HashSet<String>,
    cursor: StreamCursor,
    live: LiveHandle,
    failed: bool,
}

impl SessionWriter {
    /// Creates `root/<session_id>/` and writes the initial manifest.
    pub fn create(
        root: &Path,
        session_id: Uuid,
        started_at: DateTime<Utc>,
        config: SessionConfig,
        service: Arc<dyn AttestationService>,
    ) -> Result<Self, StoreError> {
        let paths = SessionPaths::under(root, session_id);
        fs::create_dir_all(paths.segments_dir())?;
        fs::create_dir_all(paths.media_dir())?;
        let manifest = SessionManifest::new(session_id, started_at, config);
        let w = SessionWriter {
            paths,
            manifest,
            service,
            open: SegmentFile::new(0, Digest32::ZERO),
            open_bytes: 0,
            open_first_t: None,
            media_on_disk: HashSet::new(),
            cursor: StreamCursor::session(),
            live: LiveHandle::default(),
            failed: false,
        };
        w.write_manifest()?;
        Ok(w)
    }

    pub fn session_id(&self) -> Uuid {
        self.manifest.session_id
    }

    pub fn dir(&self) -> &Path {
        &self.paths.dir
    }

    pub fn manifest(&self) -> &SessionManifest {
        &self.manifest
    }

    pub fn live(&self) -> LiveHandle {
        self.live.clone()
    }

    fn write_manifest(&self) -> Result<(), StoreError> {
        let bytes = serde_json::to_vec_pretty(&self.manifest).map_err(CanonicalError::from)?;
        write_atomic(&self.paths.manifest(), &bytes)?;
        Ok(())
    }

    /// Marks the session incomplete after a write failure, best effort.
    fn fail(&mut self, err: StoreError) -> StoreError {
        if !self.failed {
            self.failed = true;
            self.manifest.status = SessionStatus::Incomplete;
            if let Err(e) = self.write_manifest() {
                log::error!("could not mark session incomplete: {e}");
            }
            self.live.write().expect("live lock").closed = true;
        }
        err
    }

    fn write_media(&mut self, media: &MediaRef, bytes: &[u8]) -> Result<(), StoreError> {
        if bytes.len() as u64 != media.byte_len || Digest32::of(bytes) != media.content_hash {
            return Err(StoreError::MediaMismatch(media.relative_path.clone()));
        }
        if self.media_on_disk.contains(&media.relative_path) {
            return Ok(());
        }
        write_atomic(&self.paths.resolve(&media.relative_path), bytes)?;
        self.media_on_disk.insert(media.relative_path.clone());
        Ok(())
    }

    /// Buffers one envelope; `media` must be the referenced bytes, if any.
    /// Rotates first if the envelope would overflow the open segment.
    pub fn append(&mut self, env: SampleEnvelope, media: Option<&[u8]>) -> Result<(), StoreError> {
        if self.failed {
            return Err(StoreError::Closed);
        }
        let mut report = ValidationReport::default();
        validate_payload(&env.payload, "payload", &mut report);
        let mut probe = self.cursor.clone();
        probe.check(&env, "envelope", &mut report);
        if !report.is_empty() {
            return Err(StoreError::Invalid(report));
        }
        let env_bytes = canonical::to_vec(&env)?.len() as u64 + 1;
        let media_len = match (env.payload.media(), media) {
            (Some(m), Some(_)) if !self.open.media.contains(m) => m.byte_len,
            (Some(_), Some(_)) => 0,
            (Some(m), None) if self.media_on_disk.contains(&m.relative_path) => 0,
            (Some(m), None) => return Err(StoreError::MediaMismatch(m.relative_path.clone())),
            (None, _) => 0,
        };
        let policy = self.manifest.config.rotation;
        let over_size = self.open_bytes + env_bytes + media_len > policy.max_bytes;
        let over_time = self
            .open_first_t
            .is_some_and(|t0| env.t_ms.saturating_sub(t0) >= policy.max_duration_ms);
        if !self.open.samples.is_empty() && (over_size || over_time) {
            self.rotate()?;
        }
        if let (Some(m), Some(bytes)) = (env.payload.media(), media) {
            let m = m.clone();
            if let Err(e) = self.write_media(&m, bytes) {
                return Err(match e {
                    StoreError::MediaMismatch(_) => e,
                    other => self.fail(other),
                });
            }
            if !self.open.media.contains(&m) {
                self.open.media.push(m);
            }
        } else if let Some(m) = env.payload.media() {
            if !self.open.media.contains(m) {
                self.open.media.push(m.clone());
            }
        }
        self.cursor = probe;
        self.open_bytes += env_bytes + media_len;
        self.open_first_t.get_or_insert(env.t_ms);
        self.open.samples.push(env.clone());
        self.live.write().expect("live lock").open.push(env);
        Ok(())
    }

    /// Seals the open segment: serialize, hash, attest, write, then update
    /// the manifest. The next segment carries the returned attestation.
    pub fn rotate(&mut self) -> Result<(), StoreError> {
        if self.failed {
            return Err(StoreError::Closed);
        }
        match self.seal() {
            Ok(()) => Ok(()),
            Err(e) => Err(self.fail(e)),
        }
    }

    fn seal(&mut self) -> Result<(), StoreError> {
        let seq = self.open.header.seq;
        let bytes = self.open.canonical_bytes()?;
        let h = hash_segment(&self.open)?.digest;
        debug_assert_eq!(h, Digest32::of(&bytes));
        let (attested, next_prev) = match self.service.attest(self.manifest.session_id, seq, h) {
            Ok(a) => (true, a),
            Err(e) => {
                log::warn!("segment {seq} left unattested: {e}");
                (false, Digest32::ZERO)
            }
        };
        {
            // Readers see either the old open buffer or the sealed file.
            let mut live = self.live.write().expect("live lock");
            write_atomic(&self.paths.segment(seq), &bytes)?;
            live.sealed.push(seq);
            live.open.clear();
        }
        self.manifest.segments.push(SegmentEntry {
            seq,
            file_path: SessionPaths::segment_rel(seq),
            byte_len: bytes.len() as u64,
            attested,
        });
        self.open = SegmentFile::new(seq + 1, next_prev);
        self.open_bytes = 0;
        self.open_first_t = None;
        self.write_manifest()
    }

    pub fn mark_unanalyzed(&mut self, marker: UnanalyzedMarker) {
        self.manifest.unanalyzed.push(marker);
    }

    pub fn mark_quarantined(&mut self, marker: QuarantineMarker) {
        self.manifest.quarantined.push(marker);
    }

    /// Seals the last segment (or an empty one if none was sealed yet) and
    /// finalizes the manifest.
    pub fn close(mut self, duration_ms: u64) -> Result<SessionManifest, StoreError> {
        if self.failed {
            return Err(StoreError::Closed);
        }
        if !self.open.samples.is_empty() || self.manifest.segments.is_empty() {
            self.rotate()?;
        }
        self.manifest.status = SessionStatus::Closed;
        self.manifest.duration_ms = duration_ms;
        if let Err(e) = self.write_manifest() {
            return Err(self.fail(e));
        }
        self.live.write().expect("live lock").closed = true;
        Ok(self.manifest)
    }

    /// Gives up on the session, keeping what was sealed.
    pub fn abort(mut self, duration_ms: u64) -> SessionManifest {
        self.manifest.duration_ms = duration_ms;
        let _ = self.fail(StoreError::Closed);
        self.manifest
    }
}
