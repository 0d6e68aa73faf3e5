//! WebSocket preview, backpressure, privacy at the API boundary and stop
//! semantics.

mod common;

use std::fs;
use std::time::Duration;

use futures_util::StreamExt;
use recorder_core::enrich::{is_pixelated, MOSAIC_CELL_PX};
use recorder_core::model::{Cognition, Payload, Rect, SampleEnvelope, SessionStatus, StreamId};
use recorder_core::sim::{to_pixels, CameraDriver, EventKind, NormBox, Raster, ScenarioScript};
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;

type Ws = tokio_tungstenite::WebSocketStream<tokio::net::TcpStream>;

async fn connect(srv: &common::Server, path: &str, recv_buffer: Option<u32>) -> Ws {
    let socket = tokio::net::TcpSocket::new_v4().unwrap();
    if let Some(n) = recv_buffer {
        socket.set_recv_buffer_size(n).unwrap();
    }
    let stream = socket.connect(srv.addr).await.unwrap();
    let (ws, _) = tokio_tungstenite::client_async(srv.ws_url(path), stream)
        .await
        .unwrap();
    ws
}

/// Reads until the server closes; returns the envelopes and close reason.
async fn drain(ws: &mut Ws) -> (Vec<SampleEnvelope>, Value) {
    let mut got = Vec::new();
    while let Some(msg) = ws.next().await {
        match msg.unwrap() {
            Message::Text(t) => got.push(serde_json::from_str(t.as_str()).unwrap()),
            Message::Close(Some(frame)) => {
                return (got, serde_json::from_str(frame.reason.as_str()).unwrap())
            }
            Message::Close(None) => panic!("close without counters"),
            _ => {}
        }
    }
    panic!("socket ended without a close frame");
}

#[tokio::test(flavor = "multi_thread")]
async fn websocket_shows_raised_stress_inside_its_span() {
    let srv = common::spawn(|_| {}).await;
    let mut s = ScenarioScript::new(5, 20_000);
    s.push(
        8_000,
        EventKind::CognitionSet {
            values: Cognition {
                stress: 0.9,
                ..Cognition::NEUTRAL
            },
            span_ms: 6_000,
        },
    );
    let id = srv
        .create(json!({"config": common::small_config(), "scenario": s, "clock": common::real_time(5.0)}))
        .await;
    let mut ws = connect(&srv, &format!("/live/{id}?streams=cognition"), None).await;
    let (got, counters) = drain(&mut ws).await;
    assert_eq!(counters["dropped"], 0);
    assert!(got.iter().all(|e| e.stream() == StreamId::Cognition));
    let mut in_span = 0;
    for e in &got {
        let Payload::Cognition(c) = &e.payload else {
            unreachable!()
        };
        let inside = (8_000..14_000).contains(&e.t_ms);
        in_span += usize::from(inside);
        assert_eq!(c.stress, if inside { 0.9 } else { 0.5 }, "t={}", e.t_ms);
    }
    // Headset state arrives at 2 Hz; all twelve in-span samples are seen.
    assert_eq!(in_span, 12);
    srv.wait_closed(&id, Duration::from_secs(30)).await;
    assert_eq!(srv.get(&format!("/live/{id}")).await.0, 409);
}

#[tokio::test(flavor = "multi_thread")]
async fn slow_viewer_drops_previews_but_nothing_persisted_is_lost() {
    let srv = common::spawn(|c| c.live_queue_capacity = 8).await;
    let mut cfg = common::small_config();
    cfg.streams.get_mut(&StreamId::ImageFrame).unwrap().enabled = false;
    let secs = 300;
    let id = srv
        .create(json!({
            "config": cfg,
            "scenario": ScenarioScript::new(9, secs * 1_000),
            "clock": common::real_time(100.0),
        }))
        .await;
    // Subscribe, then read nothing until the session is over.
    let mut ws = connect(&srv, &format!("/live/{id}?streams=eeg-raw"), Some(4_096)).await;
    let summary = srv.wait_closed(&id, Duration::from_secs(120)).await;
    assert_eq!(summary.status, SessionStatus::Closed);
    let live = summary.live.unwrap();
    assert!(live.dropped > 0, "{live:?}");

    let (got, counters) = drain(&mut ws).await;
    let published = counters["published"].as_u64().unwrap();
    let dropped = counters["dropped"].as_u64().unwrap();
    assert!(dropped > 0);
    assert_eq!(got.len() as u64 + dropped, published);
    assert_eq!(counters["delivered"].as_u64().unwrap(), got.len() as u64);
    // Delivered previews are in order with no duplicates.
    assert!(got
        .windows(2)
        .all(|w| w[0].seq_in_stream < w[1].seq_in_stream));

    let persisted = srv.all_samples(&id, "eeg-raw", 10_000).await;
    assert_eq!(persisted.len() as u64, secs * 128);
    assert!(persisted
        .iter()
        .enumerate()
        .all(|(i, e)| e["seq_in_stream"] == i as u64));
    let (_, verdict) = srv.get(&format!("/sessions/{id}/verify")).await;
    assert_eq!(verdict["verdict"], "valid");
}

fn face_scenario() -> ScenarioScript {
    let mut s = ScenarioScript::new(13, 8_000);
    s.push(
        0,
        EventKind::Face {
            person_id: "stranger".into(),
            signature: None,
            bbox: NormBox::new(0.55, 0.2, 0.3, 0.4),
            span_ms: 8_000,
        },
    );
    s.push(
        0,
        EventKind::Face {
            person_id: "alice".into(),
            signature: Some("sig-alice".into()),
            bbox: NormBox::new(0.1, 0.1, 0.3, 0.4),
            span_ms: 8_000,
        },
    );
    s
}

async fn frame_pixels(srv: &common::Server, id: &str, env: &SampleEnvelope) -> Raster {
    let Payload::ImageFrame(f) = &env.payload else {
        unreachable!()
    };
    let rel = f.media.relative_path.strip_prefix("media/").unwrap();
    let r = srv
        .http
        .get(srv.url(&format!("/sessions/{id}/media/{rel}")))
        .send()
        .await
        .unwrap();
    assert_eq!(r.status().as_u16(), 200);
    Raster::decode_ppm(&r.bytes().await.unwrap()).unwrap()
}

#[tokio::test(flavor = "multi_thread")]
async fn served_frames_never_show_a_non_consented_face() {
    let srv = common::spawn(|_| {}).await;
    let consent = json!({"person_id": "alice", "face_signature": "sig-alice", "scope": "global"});
    assert_eq!(srv.post("/consent", consent).await.0, 201);
    let cfg = common::small_config();
    let s = face_scenario();
    let (w, h) = CameraDriver::new(&cfg, &s).unwrap().dims();
    let stranger: Rect = to_pixels(&NormBox::new(0.55, 0.2, 0.3, 0.4), w, h);
    let alice: Rect = to_pixels(&NormBox::new(0.1, 0.1, 0.3, 0.4), w, h);

    let id = srv
        .create(json!({"config": cfg, "scenario": s, "clock": common::real_time(4.0)}))
        .await;
    let mut ws = connect(&srv, &format!("/live/{id}?streams=image-frame"), None).await;
    let mut live_frames = 0;
    while let Some(msg) = ws.next().await {
        let Message::Text(t) = msg.unwrap() else {
            continue;
        };
        let env: SampleEnvelope = serde_json::from_str(t.as_str()).unwrap();
        let img = frame_pixels(&srv, &id, &env).await;
        assert!(
            is_pixelated(&img, stranger, MOSAIC_CELL_PX),
            "live t={}",
            env.t_ms
        );
        assert!(
            !is_pixelated(&img, alice, MOSAIC_CELL_PX),
            "live t={}",
            env.t_ms
        );
        live_frames += 1;
    }
    assert!(live_frames > 0);

    srv.wait_closed(&id, Duration::from_secs(30)).await;
    let stored = srv.all_samples(&id, "image-frame", 100).await;
    assert_eq!(stored.len(), 8);
    for v in stored {
        let env: SampleEnvelope = serde_json::from_value(v).unwrap();
        let img = frame_pixels(&srv, &id, &env).await;
        assert!(
            is_pixelated(&img, stranger, MOSAIC_CELL_PX),
            "stored t={}",
            env.t_ms
        );
        assert!(
            !is_pixelated(&img, alice, MOSAIC_CELL_PX),
            "stored t={}",
            env.t_ms
        );
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn second_stop_is_a_conflict_and_changes_nothing() {
    let srv = common::spawn(|_| {}).await;
    let id = srv
        .create(json!({
            "config": common::small_config(),
            "scenario": ScenarioScript::new(2, 60_000),
            "clock": common::real_time(1.0),
        }))
        .await;
    tokio::time::sleep(Duration::from_millis(1_500)).await;
    let (status, stopped) = srv.post(&format!("/sessions/{id}/stop"), json!({})).await;
    assert_eq!(status, 200, "{stopped}");
    assert_eq!(stopped["status"], "closed");
    let ended_at = stopped["duration_ms"].as_u64().unwrap();
    assert!((1_000..60_000).contains(&ended_at), "{ended_at}");

    let dir = srv.dir.path().join("data").join(&id);
    let snapshot = |d: &std::path::Path| -> Vec<(String, Vec<u8>)> {
        let mut files: Vec<_> = fs::read_dir(d.join("segments"))
            .unwrap()
            .map(|e| e.unwrap().path())
            .chain([d.join("manifest.json")])
            .map(|p| (p.display().to_string(), fs::read(&p).unwrap()))
            .collect();
        files.sort();
        files
    };
    let before = snapshot(&dir);
    let (status, err) = srv.post(&format!("/sessions/{id}/stop"), json!({})).await;
    assert_eq!(status, 409);
    assert_eq!(err["error"], "conflict");
    assert_eq!(snapshot(&dir), before);
    let (_, verdict) = srv.get(&format!("/sessions/{id}/verify")).await;
    assert_eq!(verdict["verdict"], "valid");
}

#[tokio::test(flavor = "multi_thread")]
async fn concurrent_stops_have_one_winner() {
    let srv = std::sync::Arc::new(common::spawn(|_| {}).await);
    let id = srv
        .create(json!({
            "config": common::small_config(),
            "scenario": ScenarioScript::new(2, 60_000),
            "clock": common::real_time(1.0),
        }))
        .await;
    tokio::time::sleep(Duration::from_millis(300)).await;
    let mut tasks = Vec::new();
    for _ in 0..4 {
        let (srv, id) = (srv.clone(), id.clone());
        tasks.push(tokio::spawn(async move {
            srv.post(&format!("/sessions/{id}/stop"), json!({})).await.0
        }));
    }
    let mut codes = Vec::new();
    for t in tasks {
        codes.push(t.await.unwrap());
    }
    codes.sort();
    assert_eq!(codes, vec![200, 409, 409, 409]);
}
