use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use super::config::SessionConfig;
use super::stream::StreamId;
use super::version::{check_version, VersionError, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionStatus {
    Recording,
    Closed,
    /// Aborted by a write failure; sealed segments remain readable.
    Incomplete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentEntry {
    pub seq: u64,
    /// Relative to the session directory.
    pub file_path: String,
    pub byte_len: u64,
    pub attested: bool,
}

/// An analyzer could not process a persisted sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnanalyzedMarker {
    pub stream: StreamId,
    pub seq: u64,
    pub analyzer: String,
    pub reason: String,
}

/// A frame withheld from storage because face detection failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuarantineMarker {
    pub t_ms: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionManifest {
    pub schema_version: String,
    pub session_id: Uuid,
    pub subject_id: String,
    pub started_at: DateTime<Utc>,
    pub config: SessionConfig,
    pub status: SessionStatus,
    /// Session length in milliseconds of session time.
    pub duration_ms: u64,
    pub segments: Vec<SegmentEntry>,
    #[serde(default)]
    pub unanalyzed: Vec<UnanalyzedMarker>,
    #[serde(default)]
    pub quarantined: Vec<QuarantineMarker>,
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestDecodeError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Version(#[from] VersionError),
}

impl SessionManifest {
    pub fn new(session_id: Uuid, started_at: DateTime<Utc>, config: SessionConfig) -> Self {
        SessionManifest {
            schema_version: SCHEMA_VERSION.to_string(),
            session_id,
            subject_id: config.subject_id.clone(),
            started_at,
            config,
            status: SessionStatus::Recording,
            duration_ms: 0,
            segments: Vec::new(),
            unanalyzed: Vec::new(),
            quarantined: Vec::new(),
        }
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ManifestDecodeError> {
        let m: SessionManifest = serde_json::from_slice(bytes)?;
        check_version(&m.schema_version)?;
        Ok(m)
    }

    pub fn unattested(&self) -> impl Iterator<Item = &SegmentEntry> {
        self.segments.iter().filter(|s| !s.attested)
    }
}
