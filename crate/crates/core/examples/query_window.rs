//! Records a session, then prints the envelopes of a few streams inside a
//! time window as JSON lines.
//!
//! cargo run -p recorder-core --example query_window -- [from_ms] [to_ms]

use recorder_core::model::{canonical, SessionConfig, StreamId};
use recorder_core::sim::generate::demo_scenario;
use recorder_core::store::query;
use recorder_core::Recorder;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<u64>());
    let from = args.next().transpose()?.unwrap_or(2_000);
    let to = args.next().transpose()?.unwrap_or(4_000);
    let out = Recorder::new(
        std::env::temp_dir().join("recorder-query"),
        SessionConfig::default(),
        demo_scenario(3, 10_000),
    )
    .run()?;
    let streams = [
        StreamId::Gsr,
        StreamId::Cognition,
        StreamId::FacialExpression,
    ];
    for env in query(&out.dir, &streams, from, to)? {
        println!("{}", String::from_utf8(canonical::to_vec(&env)?)?);
    }
    Ok(())
}
