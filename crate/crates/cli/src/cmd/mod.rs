//! One module per subcommand.

pub mod export;
pub mod project;
pub mod record;
pub mod replay;
pub mod report;
pub mod schema;
pub mod serve;
pub mod verify;

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use recorder_core::integrity::{AttestationService, LocalAttestationService};
use recorder_server::{HttpAttestationClient, ATTESTATION_DIR};
use serde::Serialize;

use crate::failure::{ignore_broken_pipe, ExitKind, Failure};
use crate::ServiceArgs;

/// The service named on the command line, or the local ledger at
/// `default_dir` when neither flag is given.
pub fn service(
    args: &ServiceArgs,
    default_dir: &Path,
    must_exist: bool,
) -> Result<Arc<dyn AttestationService>, Failure> {
    if let Some(url) = &args.service {
        return Ok(Arc::new(HttpAttestationClient::new(url.clone())));
    }
    let dir = args
        .local_store
        .clone()
        .unwrap_or_else(|| default_dir.join(ATTESTATION_DIR));
    if must_exist && !dir.is_dir() {
        return Err(Failure::new(
            ExitKind::Unavailable,
            format!("no attestation ledger at {}", dir.display()),
        )
        .with("path", &dir));
    }
    let local = LocalAttestationService::open(&dir).map_err(|e| Failure::io(&dir, e))?;
    Ok(Arc::new(local))
}

pub fn emit(out: &mut dyn Write, text: impl std::fmt::Display) -> Result<(), Failure> {
    writeln!(out, "{text}").or_else(ignore_broken_pipe)
}

pub fn emit_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(Failure::internal)?;
    emit(out, text)
}
