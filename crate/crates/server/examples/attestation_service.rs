//! Runs the attestation service over HTTP and exercises it with the
//! blocking client.
//!
//! cargo run -p recorder-server --example attestation_service

use std::sync::Arc;

use recorder_core::integrity::{AttestationService, LocalAttestationService};
use recorder_core::model::Digest32;
use recorder_server::{serve_attestation, HttpAttestationClient};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rt = tokio::runtime::Runtime::new()?;
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
    let url = format!("http://{}", listener.local_addr()?);
    let service = Arc::new(LocalAttestationService::in_memory());
    rt.spawn(serve_attestation(listener, service, std::future::pending()));

    let client = HttpAttestationClient::new(url.clone());
    let session = uuid::Uuid::new_v4();
    let h0 = Digest32::of(b"segment 0");
    let a0 = client.attest(session, 0, h0)?;
    println!("{url}: attested seq 0 -> {a0}");
    println!("verify genuine: {}", client.verify(session, 0, h0, a0)?);
    println!(
        "verify altered: {}",
        client.verify(session, 0, Digest32::of(b"segment 0!"), a0)?
    );
    println!(
        "rewriting seq 0: {:?}",
        client.attest(session, 0, Digest32::of(b"other")).err()
    );
    Ok(())
}
