//! Laptop-resident control API and the reference attestation service.
//!
//! The control API starts and stops sessions, serves playback queries,
//! chain verification, rate reports and projections, keeps the default
//! configuration and the consent registry, and streams live envelopes over
//! WebSocket. Every frame it serves has already been through blurring.

pub mod attestation;
pub mod error;
pub mod live;
pub mod routes;
pub mod schema;
pub mod sessions;

use std::fs;
use std::io;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use recorder_core::integrity::{AttestationService, LocalAttestationService};
use recorder_core::model::{ConsentRegistry, SessionConfig};
use recorder_core::store::write_atomic;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

pub use attestation::{attestation_router, HttpAttestationClient};
pub use error::{ApiError, ErrorBody};
pub use live::{LiveHub, LiveStats, Subscription, DEFAULT_QUEUE_CAPACITY};
pub use sessions::{SessionManager, SessionSummary};

pub const CONFIG_FILE: &str = "config.json";
pub const CONSENT_FILE: &str = "consent.json";
/// Ledger directory of the in-process attestation service.
pub const ATTESTATION_DIR: &str = ".attestation";

/// `serve --config FILE` contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerConfig {
    #[serde(default = "default_listen")]
    pub listen: SocketAddr,
    /// Sessions, defaults and the consent registry live here.
    pub data_dir: PathBuf,
    /// Remote attestation service; in-process under `data_dir` when unset.
    #[serde(default)]
    pub attestation_url: Option<String>,
    #[serde(default)]
    pub bearer_token: Option<String>,
    /// Static UI bundle served for paths outside the API.
    #[serde(default)]
    pub static_dir: Option<PathBuf>,
    #[serde(default = "default_capacity")]
    pub live_queue_capacity: usize,
}

fn default_listen() -> SocketAddr {
    SocketAddr::from(([127, 0, 0, 1], 8080))
}

fn default_capacity() -> usize {
    DEFAULT_QUEUE_CAPACITY
}

impl ServerConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        ServerConfig {
            listen: default_listen(),
            data_dir: data_dir.into(),
            attestation_url: None,
            bearer_token: None,
            static_dir: None,
            live_queue_capacity: DEFAULT_QUEUE_CAPACITY,
        }
    }

    pub fn load(path: &Path) -> Result<Self, ServeError> {
        let bytes = fs::read(path)?;
        Ok(serde_json::from_slice(&bytes)?)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad server config: {0}")]
    Config(#[from] serde_json::Error),
    #[error("stored file {0} is invalid: {1}")]
    Stored(PathBuf, String),
}

pub struct AppState {
    pub sessions: SessionManager,
    service: Arc<dyn AttestationService>,
    pub defaults: RwLock<SessionConfig>,
    pub consent: RwLock<ConsentRegistry>,
    data_dir: PathBuf,
    token: Option<String>,
    live_capacity: usize,
}

fn read_stored<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Option<T>, ServeError> {
    match fs::read(path) {
        Ok(b) => serde_json::from_slice(&b)
            .map(Some)
            .map_err(|e| ServeError::Stored(path.to_path_buf(), e.to_string())),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

impl AppState {
    /// Opens `data_dir`, loading stored defaults and consent.
    pub fn open(config: &ServerConfig) -> Result<Arc<Self>, ServeError> {
        fs::create_dir_all(&config.data_dir)?;
        let service: Arc<dyn AttestationService> = match &config.attestation_url {
            Some(url) => Arc::new(HttpAttestationClient::new(url.clone())),
            None => Arc::new(LocalAttestationService::open(
                config.data_dir.join(ATTESTATION_DIR),
            )?),
        };
        Self::with_service(config, service)
    }

    pub fn with_service(
        config: &ServerConfig,
        service: Arc<dyn AttestationService>,
    ) -> Result<Arc<Self>, ServeError> {
        fs::create_dir_all(&config.data_dir)?;
        let defaults = read_stored(&config.data_dir.join(CONFIG_FILE))?.unwrap_or_default();
        let consent = read_stored(&config.data_dir.join(CONSENT_FILE))?.unwrap_or_default();
        Ok(Arc::new(AppState {
            sessions: SessionManager::new(config.data_dir.clone(), service.clone()),
            service,
            defaults: RwLock::new(defaults),
            consent: RwLock::new(consent),
            data_dir: config.data_dir.clone(),
            token: config.bearer_token.clone(),
            live_capacity: config.live_queue_capacity.max(1),
        }))
    }

    pub fn sessions_service(&self) -> Arc<dyn AttestationService> {
        self.service.clone()
    }

    fn save_defaults(&self, config: SessionConfig) -> Result<(), ApiError> {
        let bytes = serde_json::to_vec_pretty(&config).map_err(ApiError::internal)?;
        write_atomic(&self.data_dir.join(CONFIG_FILE), &bytes).map_err(ApiError::internal)?;
        *self.defaults.write().expect("config lock") = config;
        Ok(())
    }

    /// Applies `f` to a copy of the registry and persists it on success.
    fn update_consent<T>(
        &self,
        f: impl FnOnce(&mut ConsentRegistry) -> Result<T, ApiError>,
    ) -> Result<T, ApiError> {
        let mut guard = self.consent.write().expect("consent lock");
        let mut next = guard.clone();
        let out = f(&mut next)?;
        let bytes = serde_json::to_vec_pretty(&next).map_err(ApiError::internal)?;
        write_atomic(&self.data_dir.join(CONSENT_FILE), &bytes).map_err(ApiError::internal)?;
        *guard = next;
        Ok(out)
    }
}

/// The control API, plus the static bundle when configured.
pub fn app(state: Arc<AppState>, static_dir: Option<&Path>) -> axum::Router {
    let router = routes::api_router(state);
    match static_dir {
        Some(dir) => router.fallback_service(ServeDir::new(dir)),
        None => router,
    }
}

/// Binds `config.listen` and serves until `shutdown` resolves.
pub async fn serve(
    config: ServerConfig,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServeError> {
    let state = AppState::open(&config)?;
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    log::info!("control API listening on {}", listener.local_addr()?);
    axum::serve(listener, app(state.clone(), config.static_dir.as_deref()))
        .with_graceful_shutdown(shutdown)
        .await?;
    state.sessions.stop_all().await;
    Ok(())
}

/// Serves the attestation routes for `service` until `shutdown` resolves.
pub async fn serve_attestation(
    listener: tokio::net::TcpListener,
    service: Arc<dyn AttestationService>,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    log::info!(
        "attestation service listening on {}",
        listener.local_addr()?
    );
    axum::serve(listener, attestation_router(service))
        .with_graceful_shutdown(shutdown)
        .await
}
