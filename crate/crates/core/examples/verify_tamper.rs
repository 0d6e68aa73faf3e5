//! Records a short multi-segment session, verifies it, then shows the
//! verdicts for a flipped byte and for an offline recording.
//!
//! cargo run -p recorder-core --example verify_tamper

use std::fs;
use std::sync::Arc;

use recorder_core::integrity::{verify_chain, LocalAttestationService, OfflineService};
use recorder_core::model::{segment_file_name, SessionConfig};
use recorder_core::sim::generate::demo_scenario;
use recorder_core::Recorder;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::temp_dir().join("recorder-verify-tamper");
    let mut cfg = SessionConfig::default();
    cfg.rotation.max_duration_ms = 2_000;

    let service = Arc::new(LocalAttestationService::in_memory());
    let out = Recorder::new(&root, cfg.clone(), demo_scenario(1, 6_000))
        .service(service.clone())
        .run()?;
    println!(
        "{} segments: {}",
        out.manifest.segments.len(),
        verify_chain(&out.dir, service.as_ref())?
    );

    let seg = out.dir.join("segments").join(segment_file_name(1));
    let original = fs::read(&seg)?;
    let mut bytes = original.clone();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x01;
    fs::write(&seg, &bytes)?;
    println!(
        "one bit flipped in segment 1: {}",
        verify_chain(&out.dir, service.as_ref())?
    );
    fs::write(&seg, &original)?;
    println!("restored: {}", verify_chain(&out.dir, service.as_ref())?);

    let offline = Recorder::new(&root, cfg, demo_scenario(1, 6_000))
        .service(Arc::new(OfflineService))
        .run()?;
    println!(
        "recorded offline: {}",
        verify_chain(&offline.dir, service.as_ref())?
    );
    Ok(())
}
