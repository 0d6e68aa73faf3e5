//! Records a simulated session and prints its manifest path and data rates.
//!
//! cargo run -p recorder-core --example record_session -- [seconds] [out-dir]

use std::time::Instant;

use recorder_core::integrity::{verify_chain, LocalAttestationService};
use recorder_core::model::SessionConfig;
use recorder_core::sim::generate::demo_scenario;
use recorder_core::store::{rate_report, validate_session};
use recorder_core::Recorder;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let secs: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(60);
    let out = match args.next() {
        Some(p) => std::path::PathBuf::from(p),
        None => std::env::temp_dir().join("recorder-example"),
    };
    let service = std::sync::Arc::new(LocalAttestationService::open(out.join(".attestation"))?);
    let started = Instant::now();
    let outcome = Recorder::new(
        &out,
        SessionConfig::default(),
        demo_scenario(7, secs * 1000),
    )
    .service(service.clone())
    .run()?;
    println!("manifest: {}", outcome.dir.join("manifest.json").display());
    println!("recorded {} s in {:.2?}", secs, started.elapsed());

    let report = rate_report(&outcome.dir)?;
    for (stream, r) in &report.streams {
        println!(
            "{stream:>18} {:>7} samples {:>12.3} kB/s",
            r.samples, r.kb_per_s
        );
    }
    println!(
        "total {:.3} kB/s -> {:.2} GB/day",
        report.total_kb_per_s, report.full_gb_per_day
    );
    println!(
        "text  {:.3} kB/s -> {:.3} GB/day",
        report.text_kb_per_s, report.text_gb_per_day
    );
    println!("segments: {}", outcome.manifest.segments.len());
    println!("validation: {}", validate_session(&outcome.dir)?);
    println!("chain: {}", verify_chain(&outcome.dir, service.as_ref())?);
    Ok(())
}
