use serde::{Deserialize, Serialize};

use super::canonical::{self, CanonicalError};
use super::digest::Digest32;
use super::envelope::SampleEnvelope;
use super::payload::MediaRef;
use super::version::{check_version, VersionError, SCHEMA_VERSION};

/// Chain linkage stamped into every segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainHeader {
    pub seq: u64,
    /// Attestation issued for segment `seq - 1`; all zeros for the first
    /// segment or after a segment the service never attested.
    pub prev_attestation: Digest32,
}

/// One sealed batch of samples: the unit of hashing and attestation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentFile {
    pub schema_version: String,
    pub header: ChainHeader,
    pub samples: Vec<SampleEnvelope>,
    pub media: Vec<MediaRef>,
}

#[derive(Debug, thiserror::Error)]
pub enum SegmentDecodeError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Version(#[from] VersionError),
}

impl SegmentFile {
    pub fn new(seq: u64, prev_attestation: Digest32) -> Self {
        SegmentFile {
            schema_version: SCHEMA_VERSION.to_string(),
            header: ChainHeader {
                seq,
                prev_attestation,
            },
            samples: Vec::new(),
            media: Vec::new(),
        }
    }

    /// The all-empty genesis segment.
    pub fn empty() -> Self {
        SegmentFile::new(0, Digest32::ZERO)
    }

    pub fn first_non_finite(&self) -> Option<String> {
        self.samples.iter().enumerate().find_map(|(i, s)| {
            s.payload
                .floats()
                .into_iter()
                .find(|(_, v)| !v.is_finite())
                .map(|(path, _)| format!("samples[{i}].payload.{path}"))
        })
    }

    /// Canonical bytes: sorted keys, no whitespace, shortest round-trip numbers.
    pub fn canonical_bytes(&self) -> Result<Vec<u8>, CanonicalError> {
        if let Some(path) = self.first_non_finite() {
            return Err(CanonicalError::NonFinite(path));
        }
        canonical::to_vec(self)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, SegmentDecodeError> {
        let seg: SegmentFile = serde_json::from_slice(bytes)?;
        check_version(&seg.schema_version)?;
        Ok(seg)
    }
}

/// `segments/segment-000042.json`
pub fn segment_file_name(seq: u64) -> String {
    format!("segment-{seq:06}.json")
}
