//! `verify`: check a session's chain. Exits 0 only on `Valid`.

use std::io::Write;
use std::path::Path;

use recorder_core::integrity::{verify_chain, Verdict};
use serde_json::json;

use super::{emit, emit_json, service};
use crate::failure::{verify_failure, ExitKind, Failure};
use crate::VerifyArgs;

pub fn run(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let dir = &args.session;
    if !dir.is_dir() {
        return Err(Failure::new(
            ExitKind::Session,
            format!("no session at {}", dir.display()),
        )
        .with("path", dir));
    }
    let parent = dir
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let svc = service(&args.attestation, parent, true)?;
    let verdict = verify_chain(dir, svc.as_ref()).map_err(|e| verify_failure(dir, e))?;
    if args.json {
        emit_json(out, &json!({"session": dir, "result": verdict}))?;
    } else {
        emit(out, verdict)?;
    }
    match verdict {
        Verdict::Valid => Ok(()),
        Verdict::TamperedAt(seq) => Err(Failure::new(
            ExitKind::Tampered,
            format!("segment {seq} fails verification"),
        )
        .with("seq", seq)
        .with("path", dir)),
        Verdict::GapAt(seq) => Err(Failure::new(
            ExitKind::Gap,
            format!("segment {seq} is unattested"),
        )
        .with("seq", seq)
        .with("path", dir)),
    }
}
