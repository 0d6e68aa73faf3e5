//! Segment hashing, attestation and chain verification.

mod service;
mod verify;

pub use service::{
    attestation_of, AttestError, AttestationService, AttestationView, FlakyService,
    LocalAttestationService, OfflineService,
};
pub use verify::{verify_chain, Verdict, VerifyError, MANIFEST_FILE, SEGMENTS_DIR};

use crate::model::canonical::CanonicalError;
use crate::model::{Digest32, SegmentFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentHash {
    pub seq: u64,
    pub digest: Digest32,
}

/// SHA-256 of the segment's canonical bytes.
pub fn hash_segment(segment: &SegmentFile) -> Result<SegmentHash, CanonicalError> {
    Ok(SegmentHash {
        seq: segment.header.seq,
        digest: Digest32::of(&segment.canonical_bytes()?),
    })
}
