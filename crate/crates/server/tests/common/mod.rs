#![allow(dead_code)]

use std::sync::Arc;
use std::time::{Duration, Instant};

use recorder_core::model::{SessionConfig, StreamId};
use recorder_server::sessions::SessionSummary;
use recorder_server::{app, AppState, ServerConfig};
use serde_json::{json, Value};
use tokio::net::TcpListener;

pub struct Server {
    pub base: String,
    pub addr: std::net::SocketAddr,
    pub state: Arc<AppState>,
    pub http: reqwest::Client,
    pub dir: tempfile::TempDir,
}

pub async fn spawn(configure: impl FnOnce(&mut ServerConfig)) -> Server {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ServerConfig::new(dir.path().join("data"));
    configure(&mut cfg);
    let state = AppState::open(&cfg).unwrap();
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let router = app(state.clone(), cfg.static_dir.as_deref());
    tokio::spawn(async move { axum::serve(listener, router).await.unwrap() });
    Server {
        base: format!("http://{addr}"),
        addr,
        state,
        http: reqwest::Client::new(),
        dir,
    }
}

/// Low-rate media so sessions stay small.
pub fn small_config() -> SessionConfig {
    let mut cfg = SessionConfig::default();
    cfg.streams
        .get_mut(&StreamId::ImageFrame)
        .unwrap()
        .target_kb_per_s = 12.0;
    cfg.streams
        .get_mut(&StreamId::AudioChunk)
        .unwrap()
        .target_kb_per_s = 2.0;
    cfg
}

pub fn virtual_clock() -> Value {
    json!({"mode": "virtual", "step_ms": 100})
}

pub fn real_time(speed: f64) -> Value {
    json!({"mode": "real_time", "step_ms": 50, "speed": speed})
}

impl Server {
    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    pub fn ws_url(&self, path: &str) -> String {
        format!("ws://{}{path}", self.addr)
    }

    pub async fn get(&self, path: &str) -> (u16, Value) {
        let r = self.http.get(self.url(path)).send().await.unwrap();
        let status = r.status().as_u16();
        (status, r.json().await.unwrap_or(Value::Null))
    }

    pub async fn send(
        &self,
        method: reqwest::Method,
        path: &str,
        body: Option<Value>,
    ) -> (u16, Value) {
        let mut req = self.http.request(method, self.url(path));
        if let Some(b) = body {
            req = req.json(&b);
        }
        let r = req.send().await.unwrap();
        let status = r.status().as_u16();
        (status, r.json().await.unwrap_or(Value::Null))
    }

    pub async fn post(&self, path: &str, body: Value) -> (u16, Value) {
        self.send(reqwest::Method::POST, path, Some(body)).await
    }

    pub async fn create(&self, body: Value) -> String {
        let (status, v) = self.post("/sessions", body).await;
        assert_eq!(status, 201, "{v}");
        v["session_id"].as_str().unwrap().to_string()
    }

    pub async fn summary(&self, id: &str) -> SessionSummary {
        let (status, v) = self.get(&format!("/sessions/{id}")).await;
        assert_eq!(status, 200, "{v}");
        serde_json::from_value(v).unwrap()
    }

    /// Polls until the session is no longer recording.
    pub async fn wait_closed(&self, id: &str, limit: Duration) -> SessionSummary {
        let start = Instant::now();
        loop {
            let s = self.summary(id).await;
            if s.status != recorder_core::model::SessionStatus::Recording {
                return s;
            }
            assert!(
                start.elapsed() < limit,
                "session {id} still recording after {limit:?}"
            );
            tokio::time::sleep(Duration::from_millis(20)).await;
        }
    }

    /// Every sample of `streams`, following cursors with `limit` per page.
    pub async fn all_samples(&self, id: &str, streams: &str, limit: usize) -> Vec<Value> {
        let mut out = Vec::new();
        let mut after: Option<String> = None;
        loop {
            let mut path = format!("/sessions/{id}/samples?streams={streams}&limit={limit}");
            if let Some(a) = &after {
                path.push_str(&format!("&after={a}"));
            }
            let (status, page) = self.get(&path).await;
            assert_eq!(status, 200, "{page}");
            out.extend(page["items"].as_array().unwrap().iter().cloned());
            match page["next"].as_str() {
                Some(c) => after = Some(c.to_string()),
                None => return out,
            }
        }
    }
}
