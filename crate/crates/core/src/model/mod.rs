//! Domain types shared by every stage: stream payloads, envelopes,
//! segments, manifests, configuration and consent.

pub mod canonical;
mod config;
mod consent;
mod digest;
mod envelope;
mod manifest;
mod payload;
pub mod schema;
mod segment;
mod stream;
pub mod validate;
mod version;

pub use config::{
    AudioSettings, BandPowerSettings, BlurMode, DesPhrases, Profile, RateSettings, RateUnit,
    RotationPolicy, SessionConfig, StreamSettings, GB, RECORDING_DAY_S,
};
pub use consent::{ConsentError, ConsentRecord, ConsentRegistry, ConsentScope};
pub use digest::{is_digest_hex, Digest32, DigestParseError};
pub use envelope::SampleEnvelope;
pub use manifest::{
    ManifestDecodeError, QuarantineMarker, SegmentEntry, SessionManifest, SessionStatus,
    UnanalyzedMarker,
};
pub use payload::*;
pub use segment::{segment_file_name, ChainHeader, SegmentDecodeError, SegmentFile};
pub use stream::{parse_stream_list, StreamId, UnknownStream};
pub use validate::{ValidationReport, Violation};
pub use version::{check_version, VersionError, SCHEMA_VERSION};

/// Canonical bytes of a segment.
pub fn canonical_serialize(segment: &SegmentFile) -> Result<Vec<u8>, canonical::CanonicalError> {
    segment.canonical_bytes()
}
