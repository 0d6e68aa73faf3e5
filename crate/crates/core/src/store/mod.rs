//! On-disk session store: segment rotation, playback and accounting.

mod check;
mod layout;
mod query;
mod report;
mod writer;

pub use check::validate_session;
pub use layout::{dir_size, write_atomic, SessionPaths, MEDIA_DIR};
pub use query::{
    paginate, query, query_live, read_manifest, read_segment, BadCursor, Page, PageCursor,
};
pub use report::{
    apportion, gb_per_day, kb_per_s, project_recording_days, project_with, projection_table,
    rate_report, BadTarget, Projection, ProjectionRow, RateReport, StreamRate,
    REFERENCE_PROJECTIONS,
};
pub use writer::{LiveHandle, LiveState, SessionWriter, StoreError};

use std::fs;
use std::path::{Path, PathBuf};

use uuid::Uuid;

use crate::model::SessionManifest;

/// Sessions stored directly under `root`, oldest first.
pub fn list_sessions(root: &Path) -> Result<Vec<(PathBuf, SessionManifest)>, StoreError> {
    let mut out = Vec::new();
    if !root.exists() {
        return Ok(out);
    }
    for entry in fs::read_dir(root)? {
        let path = entry?.path();
        let is_session = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.parse::<Uuid>().is_ok());
        if is_session && path.join(crate::integrity::MANIFEST_FILE).exists() {
            let m = read_manifest(&path)?;
            out.push((path, m));
        }
    }
    out.sort_by(|a, b| {
        a.1.started_at
            .cmp(&b.1.started_at)
            .then(a.1.session_id.cmp(&b.1.session_id))
    });
    Ok(out)
}
