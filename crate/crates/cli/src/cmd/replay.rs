//! `replay`: stored envelopes as JSON lines, paced by their timestamps.

use std::io::Write;
use std::time::{Duration, Instant};

use recorder_core::model::parse_stream_list;
use recorder_core::store::query;

use super::emit;
use crate::failure::{store_failure, ExitKind, Failure};
use crate::ReplayArgs;

pub fn run(args: &ReplayArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if !(args.speed > 0.0) {
        return Err(Failure::new(
            ExitKind::Invalid,
            format!("--speed must be positive, got {}", args.speed),
        ));
    }
    let streams = parse_stream_list(&args.streams).map_err(|e| {
        Failure::new(ExitKind::Invalid, e.to_string()).with("streams", &args.streams)
    })?;
    if args.from_ms >= args.to_ms {
        return Err(Failure::new(
            ExitKind::Invalid,
            "--from-ms must be before --to-ms",
        ));
    }
    let envelopes = query(&args.session, &streams, args.from_ms, args.to_ms)
        .map_err(|e| store_failure(&args.session, e))?;
    let Some(first) = envelopes.first().map(|e| e.t_ms) else {
        return Ok(());
    };
    let started = Instant::now();
    for env in &envelopes {
        if args.speed.is_finite() {
            let due = Duration::from_secs_f64((env.t_ms - first) as f64 / 1_000.0 / args.speed);
            if let Some(wait) = due.checked_sub(started.elapsed()) {
                out.flush().ok();
                std::thread::sleep(wait);
            }
        }
        let line = serde_json::to_string(env).map_err(Failure::internal)?;
        emit(out, line)?;
    }
    Ok(())
}
