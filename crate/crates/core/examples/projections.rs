//! Days of recording needed per target volume, for the default rates.
//!
//! cargo run -p recorder-core --example projections -- [target_gb]

use recorder_core::model::{Profile, SessionConfig};
use recorder_core::store::{project_with, projection_table};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!(
        "{:>10} {:>5} {:>12} {:>12} {:>8}",
        "GB", "mode", "days", "reference", "error"
    );
    for r in projection_table() {
        println!(
            "{:>10} {:>5?} {:>12.3} {:>12} {:>7.1}%",
            r.target_gb,
            r.mode,
            r.days,
            r.reference_days,
            r.relative_error * 100.0
        );
    }
    if let Some(gb) = std::env::args().nth(1) {
        let cfg = SessionConfig::default();
        for mode in [Profile::Full, Profile::Text] {
            let p = project_with(&cfg, gb.parse()?, mode)?;
            println!(
                "{gb} GB {mode:?}: {:.3} GB/day, {:.3} days",
                p.daily_gb, p.days
            );
        }
    }
    Ok(())
}
