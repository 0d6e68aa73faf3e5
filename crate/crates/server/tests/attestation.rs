//! The attestation service over HTTP, and the control API using it.

mod common;

use std::sync::Arc;
use std::time::Duration;

use recorder_core::integrity::{
    attestation_of, AttestError, AttestationService, LocalAttestationService,
};
use recorder_core::model::Digest32;
use recorder_core::sim::ScenarioScript;
use recorder_server::{serve_attestation, HttpAttestationClient};
use serde_json::{json, Value};
use uuid::Uuid;

struct Attestd {
    url: String,
    _shutdown: tokio::sync::oneshot::Sender<()>,
    _rt: std::thread::JoinHandle<()>,
}

/// Runs the service on its own runtime so blocking clients can call it
/// from plain threads.
fn attestd(service: Arc<dyn AttestationService>) -> Attestd {
    attestd_at("127.0.0.1:0".parse().unwrap(), service)
}

fn attestd_at(addr: std::net::SocketAddr, service: Arc<dyn AttestationService>) -> Attestd {
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let (addr_tx, addr_rx) = std::sync::mpsc::channel();
    let rt = std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .enable_all()
            .build()
            .unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind(addr).await.unwrap();
            addr_tx.send(listener.local_addr().unwrap()).unwrap();
            serve_attestation(listener, service, async {
                let _ = rx.await;
            })
            .await
            .unwrap();
        });
    });
    let addr = addr_rx.recv().unwrap();
    Attestd {
        url: format!("http://{addr}"),
        _shutdown: tx,
        _rt: rt,
    }
}

fn digest(tag: &str) -> Digest32 {
    Digest32::of(tag.as_bytes())
}

#[test]
fn client_round_trips_every_operation() {
    let d = attestd(Arc::new(LocalAttestationService::in_memory()));
    let c = HttpAttestationClient::new(d.url.clone());
    let s = Uuid::new_v4();
    let a0 = c.attest(s, 0, digest("h0")).unwrap();
    assert_eq!(
        c.attest(s, 0, digest("h0")).unwrap(),
        a0,
        "identical retry re-issues"
    );
    let a1 = c.attest(s, 1, digest("h1")).unwrap();
    assert_ne!(a0, a1);

    assert!(c.verify(s, 0, digest("h0"), a0).unwrap());
    assert!(!c.verify(s, 0, digest("h0"), a1).unwrap());
    assert!(!c.verify(s, 0, digest("other"), a0).unwrap());
    assert!(!c.verify(s, 7, digest("h0"), a0).unwrap());
    assert!(!c.verify(Uuid::new_v4(), 0, digest("h0"), a0).unwrap());

    // Without the nonce, `a` cannot be recomputed from `h` alone.
    assert_ne!(a0, attestation_of(&digest("h0"), &Digest32::ZERO));

    let list = c.attestations(s).unwrap();
    assert_eq!(list.len(), 2);
    assert_eq!((list[0].seq, list[0].h, list[0].a), (0, digest("h0"), a0));
    assert_eq!((list[1].seq, list[1].h, list[1].a), (1, digest("h1"), a1));
    assert!(c.attestations(Uuid::new_v4()).unwrap().is_empty());
}

#[test]
fn service_errors_survive_the_wire() {
    let d = attestd(Arc::new(LocalAttestationService::in_memory()));
    let c = HttpAttestationClient::new(d.url.clone());
    let s = Uuid::new_v4();
    c.attest(s, 0, digest("h0")).unwrap();
    c.attest(s, 3, digest("h3")).unwrap();
    assert_eq!(
        c.attest(s, 0, digest("changed")),
        Err(AttestError::Conflict(0))
    );
    assert_eq!(
        c.attest(s, 2, digest("h2")),
        Err(AttestError::OutOfOrder { seq: 2, last: 3 })
    );
}

#[test]
fn raw_wire_format_uses_hex_fields_and_hides_nonces() {
    let d = attestd(Arc::new(LocalAttestationService::in_memory()));
    let agent = ureq::Agent::new_with_config(
        ureq::Agent::config_builder()
            .http_status_as_error(false)
            .build(),
    );
    let s = Uuid::new_v4();
    let h = digest("h0").to_string();
    let mut r = agent
        .post(&format!("{}/attest", d.url))
        .send_json(json!({"session_id": s, "seq": 0, "h_hex": h}))
        .unwrap();
    assert_eq!(r.status().as_u16(), 200);
    let body: Value = r.body_mut().read_json().unwrap();
    let a = body["a_hex"].as_str().unwrap().to_string();
    assert_eq!(a.len(), 64);

    let mut r = agent
        .get(&format!("{}/sessions/{s}/attestations", d.url))
        .call()
        .unwrap();
    let list: Value = r.body_mut().read_json().unwrap();
    assert_eq!(list, json!([{"seq": 0, "h_hex": h, "a_hex": a}]));

    let mut r = agent
        .post(&format!("{}/verify", d.url))
        .send_json(json!({"session_id": s, "seq": 0, "h_hex": h, "next_prev_attestation_hex": a}))
        .unwrap();
    assert_eq!(
        r.body_mut().read_json::<Value>().unwrap(),
        json!({"ok": true})
    );

    for bad in [
        json!({"session_id": s, "seq": 1, "h_hex": "zz"}),
        json!({"session_id": "nope", "seq": 1, "h_hex": h}),
        json!({"session_id": s, "seq": -1, "h_hex": h}),
        json!({"session_id": s, "h_hex": h}),
    ] {
        let mut r = agent
            .post(&format!("{}/attest", d.url))
            .send_json(&bad)
            .unwrap();
        assert_eq!(r.status().as_u16(), 422, "{bad}");
        assert_eq!(
            r.body_mut().read_json::<Value>().unwrap()["error"],
            "invalid"
        );
    }
    let mut r = agent
        .post(&format!("{}/attest", d.url))
        .send_json(json!({"session_id": s, "seq": 0, "h_hex": digest("x").to_string()}))
        .unwrap();
    assert_eq!(r.status().as_u16(), 409);
    let e: Value = r.body_mut().read_json().unwrap();
    assert_eq!(
        (e["error"].as_str(), e["seq"].as_u64()),
        (Some("conflict"), Some(0))
    );
}

#[test]
fn unreachable_service_is_unavailable() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);
    let c = HttpAttestationClient::with_timeout(url, Duration::from_millis(500));
    let s = Uuid::new_v4();
    assert!(matches!(
        c.attest(s, 0, digest("h")),
        Err(AttestError::Unavailable(_))
    ));
    assert!(matches!(
        c.verify(s, 0, digest("h"), digest("a")),
        Err(AttestError::Unavailable(_))
    ));
    assert!(matches!(
        c.attestations(s),
        Err(AttestError::Unavailable(_))
    ));
}

#[tokio::test(flavor = "multi_thread")]
async fn control_api_records_against_a_remote_service() {
    let ledger = tempfile::tempdir().unwrap();
    let local = Arc::new(LocalAttestationService::open(ledger.path()).unwrap());
    let d = attestd(local.clone());
    let url = d.url.clone();
    let srv = common::spawn(move |c| c.attestation_url = Some(url)).await;
    let id = srv
        .create(json!({
            "config": common::small_config(),
            "scenario": ScenarioScript::new(4, 12_000),
            "clock": common::virtual_clock(),
        }))
        .await;
    let summary = srv.wait_closed(&id, Duration::from_secs(60)).await;
    assert_eq!(summary.unattested, 0);
    let (status, verdict) = srv.get(&format!("/sessions/{id}/verify")).await;
    assert_eq!(status, 200);
    assert_eq!(verdict["verdict"], "valid");
    let records = local.attestations(id.parse().unwrap()).unwrap();
    assert_eq!(records.len(), summary.segments);
}

#[tokio::test(flavor = "multi_thread")]
async fn segments_recorded_while_the_service_is_down_are_gaps() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let url = format!("http://{addr}");
    let srv = common::spawn(move |c| c.attestation_url = Some(url)).await;
    let id = srv
        .create(json!({
            "config": common::small_config(),
            "scenario": ScenarioScript::new(4, 6_000),
            "clock": common::virtual_clock(),
        }))
        .await;
    let summary = srv.wait_closed(&id, Duration::from_secs(60)).await;
    assert!(summary.segments > 0);
    assert_eq!(summary.unattested, summary.segments);
    let samples = srv.all_samples(&id, "gsr", 1_000).await;
    assert_eq!(samples.len(), 6, "data keeps flowing without attestation");

    let (status, err) = srv.get(&format!("/sessions/{id}/verify")).await;
    assert_eq!(status, 503, "{err}");
    assert_eq!(err["error"], "unavailable");

    let _d = attestd_at(addr, Arc::new(LocalAttestationService::in_memory()));
    let (status, verdict) = srv.get(&format!("/sessions/{id}/verify")).await;
    assert_eq!(status, 200, "{verdict}");
    assert_eq!(verdict["verdict"], "gap_at");
    assert_eq!(verdict["seq"], 0);
}
