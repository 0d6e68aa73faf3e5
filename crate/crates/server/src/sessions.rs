//! Session lifecycle: start, stop, status. Transitions are serialized per
//! session; recording runs on its own thread.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use recorder_core::enrich::Clients;
use recorder_core::integrity::AttestationService;
use recorder_core::model::{ConsentRegistry, SessionConfig, SessionManifest, SessionStatus};
use recorder_core::sim::{ClockMode, ScenarioScript};
use recorder_core::store::{list_sessions, read_manifest, LiveHandle, SessionPaths, StoreError};
use recorder_core::{RecordError, Recorder};
use serde::{Deserialize, Serialize};
use tokio::sync::watch;
use uuid::Uuid;

use crate::error::ApiError;
use crate::live::{LiveHub, LiveStats};

/// Everything needed to start one session.
pub struct SessionRequest {
    pub config: SessionConfig,
    pub scenario: ScenarioScript,
    pub clock: ClockMode,
    pub registry: ConsentRegistry,
    pub clients: Option<Clients>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: Uuid,
    pub subject_id: String,
    pub status: SessionStatus,
    pub started_at: DateTime<Utc>,
    pub duration_ms: u64,
    pub segments: usize,
    pub unattested: usize,
    pub unanalyzed: usize,
    pub quarantined: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Preview counters; present for sessions started by this server.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub live: Option<LiveStats>,
}

impl SessionSummary {
    pub fn of(m: &SessionManifest) -> Self {
        SessionSummary {
            session_id: m.session_id,
            subject_id: m.subject_id.clone(),
            status: m.status,
            started_at: m.started_at,
            duration_ms: m.duration_ms,
            segments: m.segments.len(),
            unattested: m.unattested().count(),
            unanalyzed: m.unanalyzed.len(),
            quarantined: m.quarantined.len(),
            error: None,
            live: None,
        }
    }
}

pub struct ActiveEntry {
    pub id: Uuid,
    pub dir: PathBuf,
    pub live: LiveHandle,
    pub hub: Arc<LiveHub>,
    stop: Arc<AtomicBool>,
    /// `None` while recording.
    outcome: Mutex<Option<Result<SessionManifest, String>>>,
    done: watch::Receiver<bool>,
    lifecycle: tokio::sync::Mutex<()>,
}

impl ActiveEntry {
    pub fn is_recording(&self) -> bool {
        self.outcome.lock().expect("outcome lock").is_none()
    }

    pub async fn wait(&self) {
        let mut done = self.done.clone();
        let _ = done.wait_for(|d| *d).await;
    }

    fn error(&self) -> Option<String> {
        match &*self.outcome.lock().expect("outcome lock") {
            Some(Err(e)) => Some(e.clone()),
            _ => None,
        }
    }
}

/// Where a session lives and whether this process is recording it.
pub enum Located {
    Active(Arc<ActiveEntry>),
    Stored(PathBuf),
}

impl Located {
    pub fn dir(&self) -> &Path {
        match self {
            Located::Active(e) => &e.dir,
            Located::Stored(d) => d,
        }
    }

    pub fn is_recording(&self) -> bool {
        matches!(self, Located::Active(e) if e.is_recording())
    }
}

pub struct SessionManager {
    root: PathBuf,
    service: Arc<dyn AttestationService>,
    active: RwLock<HashMap<Uuid, Arc<ActiveEntry>>>,
}

impl SessionManager {
    pub fn new(root: impl Into<PathBuf>, service: Arc<dyn AttestationService>) -> Self {
        SessionManager {
            root: root.into(),
            service,
            active: RwLock::new(HashMap::new()),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Creates the session directory and starts recording in the
    /// background.
    pub fn start(&self, req: SessionRequest) -> Result<Arc<ActiveEntry>, ApiError> {
        let hub = LiveHub::new();
        let stop = Arc::new(AtomicBool::new(false));
        let mut recorder = Recorder::new(&self.root, req.config, req.scenario)
            .service(self.service.clone())
            .registry(req.registry)
            .clock(req.clock)
            .tap(hub.tap())
            .stop_flag(stop.clone());
        if let Some(c) = req.clients {
            recorder = recorder.clients(c);
        }
        let session = recorder.start().map_err(start_error)?;
        let (done_tx, done) = watch::channel(false);
        let entry = Arc::new(ActiveEntry {
            id: session.session_id(),
            dir: session.dir().to_path_buf(),
            live: session.live(),
            hub,
            stop,
            outcome: Mutex::new(None),
            done,
            lifecycle: tokio::sync::Mutex::new(()),
        });
        self.active
            .write()
            .expect("sessions lock")
            .insert(entry.id, entry.clone());
        let worker = entry.clone();
        std::thread::Builder::new()
            .name(format!("session-{}", entry.id))
            .spawn(move || {
                let result = session.run();
                worker.hub.close();
                let outcome = result.map(|o| o.manifest).map_err(|e| {
                    log::warn!("session {} ended with an error: {e}", worker.id);
                    e.to_string()
                });
                *worker.outcome.lock().expect("outcome lock") = Some(outcome);
                let _ = done_tx.send(true);
            })
            .map_err(ApiError::internal)?;
        Ok(entry)
    }

    /// Stops a recording session and waits for its chain to be finalized.
    /// Anything that is not currently recording is a conflict.
    pub async fn stop(&self, id: Uuid) -> Result<SessionManifest, ApiError> {
        let entry = match self.locate(id)? {
            Located::Active(e) => e,
            Located::Stored(_) => {
                return Err(ApiError::Conflict(format!("session {id} is not recording")))
            }
        };
        let _serial = entry.lifecycle.lock().await;
        if !entry.is_recording() {
            return Err(ApiError::Conflict(format!("session {id} is not recording")));
        }
        entry.stop.store(true, Ordering::SeqCst);
        entry.wait().await;
        let outcome = entry.outcome.lock().expect("outcome lock").clone();
        match outcome {
            Some(Ok(m)) => Ok(m),
            Some(Err(e)) => Err(ApiError::Internal(e)),
            None => Err(ApiError::internal("session did not finish")),
        }
    }

    /// Ends every recording session; used on shutdown.
    pub async fn stop_all(&self) {
        let entries: Vec<_> = self
            .active
            .read()
            .expect("sessions lock")
            .values()
            .cloned()
            .collect();
        for e in entries {
            if e.is_recording() {
                let _ = self.stop(e.id).await;
            }
        }
    }

    pub fn locate(&self, id: Uuid) -> Result<Located, ApiError> {
        if let Some(e) = self.active.read().expect("sessions lock").get(&id) {
            return Ok(Located::Active(e.clone()));
        }
        let paths = SessionPaths::under(&self.root, id);
        if paths.manifest().exists() {
            Ok(Located::Stored(
                paths
                    .manifest()
                    .parent()
                    .expect("session dir")
                    .to_path_buf(),
            ))
        } else {
            Err(ApiError::NotFound(format!("session {id}")))
        }
    }

    pub fn summary(&self, loc: &Located) -> Result<(SessionSummary, SessionManifest), ApiError> {
        let m = read_manifest(loc.dir()).map_err(store_error)?;
        let mut s = SessionSummary::of(&m);
        if let Located::Active(e) = loc {
            if e.is_recording() {
                s.status = SessionStatus::Recording;
            }
            s.error = e.error();
            s.live = Some(e.hub.stats());
        }
        Ok((s, m))
    }

    pub fn list(&self) -> Result<Vec<SessionSummary>, ApiError> {
        let stored = list_sessions(&self.root).map_err(store_error)?;
        let active = self.active.read().expect("sessions lock");
        Ok(stored
            .into_iter()
            .map(|(dir, m)| {
                let loc = match active.get(&m.session_id) {
                    Some(e) => Located::Active(e.clone()),
                    None => Located::Stored(dir),
                };
                self.summary(&loc)
                    .map_or_else(|_| SessionSummary::of(&m), |(s, _)| s)
            })
            .collect())
    }
}

pub fn parse_id(raw: &str) -> Result<Uuid, ApiError> {
    raw.parse()
        .map_err(|_| ApiError::NotFound(format!("session {raw:?}")))
}

pub fn store_error(e: StoreError) -> ApiError {
    match e {
        StoreError::NotFound(s) => ApiError::NotFound(s),
        other => ApiError::internal(other),
    }
}

fn start_error(e: RecordError) -> ApiError {
    use recorder_core::sim::SimError;
    match e {
        RecordError::Config(r) => ApiError::Invalid(prefixed("config", r)),
        RecordError::Sim(SimError::Scenario(r)) => ApiError::Invalid(prefixed("scenario", r)),
        RecordError::Sim(SimError::FrameSize(e)) => {
            ApiError::invalid("config.streams.image-frame.target_kb_per_s", e.to_string())
        }
        other => ApiError::internal(other),
    }
}

/// Re-roots a report's paths under `prefix`.
pub fn prefixed(
    prefix: &str,
    r: recorder_core::model::ValidationReport,
) -> recorder_core::model::ValidationReport {
    let mut out = recorder_core::model::ValidationReport::default();
    for v in r.violations {
        let path = if v.path.is_empty() {
            prefix.to_string()
        } else {
            format!("{prefix}.{}", v.path)
        };
        out.push(path, v.rule);
    }
    out
}
