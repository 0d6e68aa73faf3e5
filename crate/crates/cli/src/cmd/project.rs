//! `project`: recording days for a target volume.

use std::fmt::Write as _;
use std::io::Write;

use recorder_core::model::{Profile, SessionConfig};
use recorder_core::store::{project_with, projection_table, ProjectionRow};

use super::{emit, emit_json};
use crate::failure::{read_json, ExitKind, Failure};
use crate::ProjectArgs;

fn mode_name(p: Profile) -> &'static str {
    match p {
        Profile::Full => "full",
        Profile::Text => "text",
    }
}

pub fn table(rows: &[ProjectionRow]) -> String {
    let mut s = format!(
        "{:>10} {:<5} {:>14} {:>12} {:>9}\n",
        "target GB", "mode", "days", "reference", "error"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:>10} {:<5} {:>14.3} {:>12} {:>+8.1}%",
            r.target_gb,
            mode_name(r.mode),
            r.days,
            r.reference_days,
            r.relative_error * 100.0
        );
    }
    s.pop();
    s
}

pub fn run(args: &ProjectArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if args.table3 {
        let rows = projection_table();
        return if args.json {
            emit_json(out, &rows)
        } else {
            emit(out, table(&rows))
        };
    }
    let config: SessionConfig = match &args.config {
        Some(p) => read_json(p, "config")?,
        None => SessionConfig::default(),
    };
    let target = args
        .target_gb
        .expect("clap requires --target-gb without --table3");
    let p = project_with(&config, target, args.mode.into())
        .map_err(|e| Failure::new(ExitKind::Invalid, e.to_string()).with("target_gb", target))?;
    if args.json {
        emit_json(out, &p)
    } else {
        emit(
            out,
            format_args!(
                "{} GB ({}) at {:.4} GB/day: {:.3} days",
                p.target_gb,
                mode_name(p.mode),
                p.daily_gb,
                p.days
            ),
        )
    }
}
