//! Whole-session validation: documents, cross-segment ordering, sentiment
//! references and media files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::model::validate::{
    validate_manifest, validate_segment_with, StreamCursor, ValidationReport,
};
use crate::model::{Digest32, Payload, Speaker};

use super::layout::SessionPaths;
use super::query::{read_manifest, read_segment};
use super::writer::StoreError;

pub fn validate_session(dir: &Path) -> Result<ValidationReport, StoreError> {
    let manifest = read_manifest(dir)?;
    let paths = SessionPaths::new(dir);
    let mut r = validate_manifest(&manifest);
    let mut cursor = StreamCursor::session();
    let mut speakers: BTreeMap<u64, Speaker> = BTreeMap::new();
    let mut sentiments = Vec::new();
    for (i, entry) in manifest.segments.iter().enumerate() {
        let path = format!("segments[{i}]");
        match fs::metadata(paths.resolve(&entry.file_path)) {
            Ok(m) if m.len() == entry.byte_len => {}
            Ok(_) => r.push(format!("{path}.byte_len"), "file length"),
            Err(_) => {
                r.push(format!("{path}.file_path"), "file exists");
                continue;
            }
        }
        let seg = read_segment(dir, entry.seq)?;
        let mut seg_report = validate_segment_with(&seg, &mut cursor);
        if seg.header.seq != entry.seq {
            seg_report.push("header.seq", "matches manifest");
        }
        for v in seg_report.violations {
            r.push(format!("{path}/{}", v.path), v.rule);
        }
        for (j, env) in seg.samples.iter().enumerate() {
            match &env.payload {
                Payload::AudioText(t) => {
                    speakers.insert(env.seq_in_stream, t.speaker);
                }
                Payload::SpeechSentiment(s) => {
                    sentiments.push((
                        format!("{path}/samples[{j}].payload.ref_transcript_seq"),
                        s.ref_transcript_seq,
                    ));
                }
                _ => {}
            }
        }
        for (j, m) in seg.media.iter().enumerate() {
            let ok = fs::read(paths.resolve(&m.relative_path))
                .map(|b| b.len() as u64 == m.byte_len && Digest32::of(&b) == m.content_hash)
                .unwrap_or(false);
            if !ok {
                r.push(format!("{path}/media[{j}]"), "media on disk");
            }
        }
    }
    for (path, seq) in sentiments {
        if speakers.get(&seq) != Some(&Speaker::Wearer) {
            r.push(path, "wearer transcript");
        }
    }
    Ok(r)
}
