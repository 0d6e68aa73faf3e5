//! Records two faces, one of whom consents to the wearer, and reports
//! which face is pixelated in each stored frame.
//!
//! cargo run -p recorder-core --example consent_blur

use recorder_core::enrich::{is_pixelated, MOSAIC_CELL_PX};
use recorder_core::model::{
    ConsentRecord, ConsentRegistry, ConsentScope, Payload, SessionConfig, StreamId,
};
use recorder_core::sim::{to_pixels, CameraDriver, EventKind, NormBox, Raster, ScenarioScript};
use recorder_core::store::{query, SessionPaths};
use recorder_core::Recorder;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alice = NormBox {
        x: 0.1,
        y: 0.1,
        w: 0.3,
        h: 0.4,
    };
    let bob = NormBox {
        x: 0.55,
        y: 0.2,
        w: 0.3,
        h: 0.4,
    };
    let mut scenario = ScenarioScript::new(5, 4_000);
    for (person, signature, bbox) in [("alice", Some("sig-alice"), alice), ("bob", None, bob)] {
        scenario.push(
            0,
            EventKind::Face {
                person_id: person.into(),
                signature: signature.map(Into::into),
                bbox,
                span_ms: 4_000,
            },
        );
    }
    let cfg = SessionConfig::default();
    let mut registry = ConsentRegistry::default();
    registry.insert(ConsentRecord::new(
        "alice",
        "sig-alice",
        ConsentScope::GrantedTo(vec![cfg.subject_id.clone()]),
    ))?;

    let (w, h) = CameraDriver::new(&cfg, &scenario)?.dims();
    let out = Recorder::new(std::env::temp_dir().join("recorder-consent"), cfg, scenario)
        .registry(registry)
        .run()?;
    let paths = SessionPaths::new(&out.dir);
    for env in query(&out.dir, &[StreamId::ImageFrame], 0, u64::MAX)? {
        let Payload::ImageFrame(f) = &env.payload else {
            continue;
        };
        let img = Raster::decode_ppm(&std::fs::read(paths.resolve(&f.media.relative_path))?)
            .ok_or("bad frame")?;
        let shown = |b: &NormBox| !is_pixelated(&img, to_pixels(b, w, h), MOSAIC_CELL_PX);
        println!(
            "t={:>5} ms  alice visible: {:<5}  bob visible: {}",
            env.t_ms,
            shown(&alice),
            shown(&bob)
        );
    }
    Ok(())
}
