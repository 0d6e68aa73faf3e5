//! `record`: run one session end to end.

use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use recorder_core::integrity::{AttestationService, OfflineService};
use recorder_core::model::validate::validate_config;
use recorder_core::model::{ConsentRegistry, SessionConfig};
use recorder_core::sim::generate::demo_scenario;
use recorder_core::sim::{ClockMode, ScenarioScript, DEFAULT_STEP_MS};
use recorder_core::store::{rate_report, SessionPaths};
use recorder_core::Recorder;
use serde_json::json;

use super::report::rate_table;
use super::{emit, emit_json, service};
use crate::failure::{read_json, record_failure, store_failure, ExitKind, Failure};
use crate::RecordArgs;

/// Session length when neither `--duration` nor `--scenario` is given.
pub const DEFAULT_DURATION_S: f64 = 60.0;
pub const DEFAULT_SEED: u64 = 7;

fn invalid(message: String) -> Failure {
    Failure::new(ExitKind::Invalid, message)
}

/// The scenario to record: the file when given, else the demo timeline,
/// with `--duration` and `--seed` applied on top.
pub fn scenario(args: &RecordArgs) -> Result<ScenarioScript, Failure> {
    let duration_ms = match args.duration {
        Some(s) if s.is_finite() && s > 0.0 => Some((s * 1_000.0).round() as u64),
        Some(s) => return Err(invalid(format!("--duration must be positive, got {s}"))),
        None => None,
    };
    let mut s = match &args.scenario {
        Some(path) => read_json::<ScenarioScript>(path, "scenario")?,
        None => demo_scenario(
            args.seed.unwrap_or(DEFAULT_SEED),
            duration_ms.unwrap_or((DEFAULT_DURATION_S * 1_000.0) as u64),
        ),
    };
    if let Some(ms) = duration_ms {
        s.duration_ms = ms;
    }
    if let Some(seed) = args.seed {
        s.seed = seed;
    }
    Ok(s)
}

pub fn clock(args: &RecordArgs) -> Result<ClockMode, Failure> {
    if !args.real_time {
        return Ok(ClockMode::Virtual {
            step_ms: DEFAULT_STEP_MS,
        });
    }
    if !(args.speed.is_finite() && args.speed > 0.0) {
        return Err(invalid(format!(
            "--speed must be positive, got {}",
            args.speed
        )));
    }
    Ok(ClockMode::RealTime {
        step_ms: DEFAULT_STEP_MS,
        speed: args.speed,
    })
}

pub fn run(args: &RecordArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let config: SessionConfig = match &args.config {
        Some(p) => read_json(p, "config")?,
        None => SessionConfig::default(),
    };
    let registry: ConsentRegistry = match &args.consent {
        Some(p) => read_json(p, "consent registry")?,
        None => ConsentRegistry::default(),
    };
    let scenario = scenario(args)?;
    let clock = clock(args)?;
    // Reject bad input before anything is written.
    let report = validate_config(&config);
    if !report.is_empty() {
        return Err(Failure::invalid(report, "config"));
    }
    let report = scenario.validate(&config);
    if !report.is_empty() {
        return Err(Failure::invalid(report, "scenario"));
    }
    std::fs::create_dir_all(&args.out).map_err(|e| Failure::io(&args.out, e))?;
    let svc: Arc<dyn AttestationService> = if args.offline {
        Arc::new(OfflineService)
    } else {
        service(&args.attestation, &args.out, false)?
    };

    let stop = Arc::new(AtomicBool::new(false));
    let flag = stop.clone();
    // Ctrl-C ends the session cleanly; a second one is left to the default.
    let _ = ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst));

    let outcome = Recorder::new(&args.out, config, scenario)
        .service(svc)
        .registry(registry)
        .clock(clock)
        .stop_flag(stop)
        .run()
        .map_err(|e| record_failure(&args.out, e))?;
    let manifest_path = SessionPaths::new(&outcome.dir).manifest();
    let report = rate_report(&outcome.dir).map_err(|e| store_failure(&outcome.dir, e))?;
    let m = &outcome.manifest;
    if args.json {
        return emit_json(
            out,
            &json!({
                "manifest": manifest_path,
                "session_dir": outcome.dir,
                "session_id": m.session_id,
                "segments": m.segments.len(),
                "unattested": m.unattested().count(),
                "report": report,
            }),
        );
    }
    emit(out, format_args!("manifest: {}", manifest_path.display()))?;
    emit(out, format_args!("session:  {}", m.session_id))?;
    emit(
        out,
        format_args!(
            "segments: {} ({} unattested)",
            m.segments.len(),
            m.unattested().count()
        ),
    )?;
    emit(out, rate_table(&report))
}
