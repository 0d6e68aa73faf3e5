//! `report`: per-stream data rates, as a table and as JSON.

use std::fmt::Write as _;
use std::io::Write;

use recorder_core::store::{rate_report, RateReport};

use super::{emit, emit_json};
use crate::failure::{store_failure, Failure};
use crate::ReportArgs;

/// Fixed-width table of a rate report, one row per stream.
pub fn rate_table(r: &RateReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<18} {:>9} {:>14} {:>14} {:>12}",
        "stream", "samples", "segment B", "media B", "kB/s"
    );
    for (id, rate) in &r.streams {
        let _ = writeln!(
            s,
            "{:<18} {:>9} {:>14} {:>14} {:>12.3}",
            id.as_str(),
            rate.samples,
            rate.envelope_bytes + rate.overhead_bytes,
            rate.media_bytes,
            rate.kb_per_s
        );
    }
    let _ = writeln!(
        s,
        "duration {:.1} s, {} bytes",
        r.duration_ms as f64 / 1_000.0,
        r.total_bytes
    );
    let _ = writeln!(
        s,
        "full {:.3} kB/s = {:.3} GB/day",
        r.total_kb_per_s, r.full_gb_per_day
    );
    let _ = write!(
        s,
        "text {:.3} kB/s = {:.4} GB/day",
        r.text_kb_per_s, r.text_gb_per_day
    );
    s
}

pub fn run(args: &ReportArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let report = rate_report(&args.session).map_err(|e| store_failure(&args.session, e))?;
    if !args.json {
        emit(out, rate_table(&report))?;
        emit(out, "")?;
    }
    emit_json(out, &report)
}
