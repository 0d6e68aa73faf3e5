//! Chain verification of a stored session against the attestation service.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{segment_file_name, Digest32, SegmentFile, SessionManifest};

use super::service::{AttestError, AttestationService};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SEGMENTS_DIR: &str = "segments";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "seq", rename_all = "snake_case")]
pub enum Verdict {
    Valid,
    TamperedAt(u64),
    GapAt(u64),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => write!(f, "Valid"),
            Verdict::TamperedAt(s) => write!(f, "TamperedAt({s})"),
            Verdict::GapAt(s) => write!(f, "GapAt({s})"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("cannot read session: {0}")]
    Io(#[from] io::Error),
    #[error("unreadable manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Service(#[from] AttestError),
}

/// Sequence numbers of the segment files present in `dir/segments`.
fn segment_files(dir: &Path) -> io::Result<Vec<u64>> {
    let seg_dir = dir.join(SEGMENTS_DIR);
    if !seg_dir.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(seg_dir)? {
        let name = entry?.file_name();
        let Some(name) = name.to_str() else { continue };
        if let Some(seq) = name
            .strip_prefix("segment-")
            .and_then(|s| s.strip_suffix(".json"))
            .and_then(|s| s.parse::<u64>().ok())
        {
            out.push(seq);
        }
    }
    Ok(out)
}

fn media_intact(dir: &Path, seg: &SegmentFile) -> bool {
    seg.media
        .iter()
        .all(|m| match fs::read(dir.join(&m.relative_path)) {
            Ok(bytes) => bytes.len() as u64 == m.byte_len && Digest32::of(&bytes) == m.content_hash,
            Err(_) => false,
        })
}

/// Verifies the session stored in `dir`, reporting the first failing seq.
///
/// For each seq the file's SHA-256 must equal the hash the service holds,
/// its header must carry its own seq, and its `prev_attestation` must be
/// the zero sentinel (seq 0) or the attestation the service issued for
/// the previous segment. Referenced media must match their recorded hash
/// and length. A missing file or an unattested segment is a gap.
pub fn verify_chain(dir: &Path, service: &dyn AttestationService) -> Result<Verdict, VerifyError> {
    let manifest_bytes = fs::read(dir.join(MANIFEST_FILE))?;
    let manifest = SessionManifest::decode(&manifest_bytes)
        .map_err(|e| VerifyError::Manifest(e.to_string()))?;
    let session = manifest.session_id;
    let records: BTreeMap<u64, Digest32> = service
        .attestations(session)?
        .into_iter()
        .map(|v| (v.seq, v.h))
        .collect();
    let files = segment_files(dir)?;
    let last = manifest
        .segments
        .iter()
        .map(|s| s.seq)
        .chain(files.iter().copied())
        .chain(records.keys().copied())
        .max();
    let Some(last) = last else {
        // A closed session always holds at least one segment.
        return Ok(Verdict::GapAt(0));
    };

    let mut prev_h: Option<Digest32> = None;
    for seq in 0..=last {
        let path = dir.join(SEGMENTS_DIR).join(segment_file_name(seq));
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Verdict::GapAt(seq)),
            Err(e) => return Err(e.into()),
        };
        let h = Digest32::of(&bytes);
        let Some(stored) = records.get(&seq) else {
            return Ok(Verdict::GapAt(seq));
        };
        if *stored != h {
            return Ok(Verdict::TamperedAt(seq));
        }
        let Ok(seg) = SegmentFile::decode(&bytes) else {
            return Ok(Verdict::TamperedAt(seq));
        };
        if seg.header.seq != seq {
            return Ok(Verdict::TamperedAt(seq));
        }
        let linked = match prev_h {
            None => seg.header.prev_attestation.is_zero(),
            Some(ph) => service.verify(session, seq - 1, ph, seg.header.prev_attestation)?,
        };
        if !linked || !media_intact(dir, &seg) {
            return Ok(Verdict::TamperedAt(seq));
        }
        prev_h = Some(h);
    }
    Ok(Verdict::Valid)
}
