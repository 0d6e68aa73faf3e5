//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use recorder_core::integrity::{AttestationService, LocalAttestationService};
use recorder_core::model::{SessionConfig, StreamId};
use recorder_core::sim::generate::{demo_scenario, random_scenario};
use recorder_core::sim::ScenarioScript;
use recorder_core::{RecordOutcome, Recorder};

/// Default config with small frames and quiet audio so sessions run fast.
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

/// `small_config` rotating every `rotate_ms` of session time.
pub fn rotating_config(rotate_ms: u64) -> SessionConfig {
    let mut cfg = small_config();
    cfg.rotation.max_duration_ms = rotate_ms;
    cfg
}

pub fn record_with(
    root: &Path,
    config: SessionConfig,
    scenario: ScenarioScript,
    service: Arc<dyn AttestationService>,
) -> RecordOutcome {
    Recorder::new(root, config, scenario)
        .service(service)
        .run()
        .expect("session records")
}

/// Records the demo scenario and returns the outcome with its service.
pub fn record_demo(
    root: &Path,
    config: SessionConfig,
    secs: u64,
) -> (RecordOutcome, Arc<LocalAttestationService>) {
    let service = Arc::new(LocalAttestationService::in_memory());
    let out = record_with(
        root,
        config,
        demo_scenario(11, secs * 1000),
        service.clone(),
    );
    (out, service)
}

pub fn record_random(
    root: &Path,
    seed: u64,
    secs: u64,
) -> (RecordOutcome, Arc<LocalAttestationService>) {
    let service = Arc::new(LocalAttestationService::in_memory());
    let out = record_with(
        root,
        small_config(),
        random_scenario(seed, secs * 1000, 12),
        service.clone(),
    );
    (out, service)
}
