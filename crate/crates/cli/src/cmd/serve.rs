//! `serve` and `attestd`: the control API and a standalone attestation
//! service. Both run until Ctrl-C.

use std::sync::Arc;

use recorder_core::integrity::LocalAttestationService;
use recorder_server::{serve, serve_attestation, ServeError, ServerConfig};
use tokio::sync::Notify;

use crate::failure::{ExitKind, Failure};
use crate::{AttestdArgs, ServeArgs};

fn runtime() -> Result<tokio::runtime::Runtime, Failure> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::new(ExitKind::Server, e.to_string()))
}

/// Resolves on the first Ctrl-C.
fn interrupted() -> impl std::future::Future<Output = ()> + Send + 'static {
    let notify = Arc::new(Notify::new());
    let n = notify.clone();
    let _ = ctrlc::set_handler(move || n.notify_one());
    async move { notify.notified().await }
}

fn server_failure(e: ServeError) -> Failure {
    match e {
        ServeError::Config(e) => Failure::new(ExitKind::Invalid, format!("bad server config: {e}")),
        other => Failure::new(ExitKind::Server, other.to_string()),
    }
}

pub fn run(args: &ServeArgs) -> Result<(), Failure> {
    let config = ServerConfig::load(&args.config).map_err(|e| match e {
        ServeError::Io(e) => Failure::io(&args.config, e),
        other => server_failure(other).with("path", &args.config),
    })?;
    runtime()?
        .block_on(serve(config, interrupted()))
        .map_err(server_failure)
}

pub fn attestd(args: &AttestdArgs) -> Result<(), Failure> {
    let service =
        LocalAttestationService::open(&args.store).map_err(|e| Failure::io(&args.store, e))?;
    runtime()?.block_on(async {
        let listener = tokio::net::TcpListener::bind(args.listen)
            .await
            .map_err(|e| Failure::new(ExitKind::Server, format!("bind {}: {e}", args.listen)))?;
        serve_attestation(listener, Arc::new(service), interrupted())
            .await
            .map_err(|e| Failure::new(ExitKind::Server, e.to_string()))
    })
}
