//! Extracts experience-sampling reports bracketed by the spoken start and
//! end phrases from a run of transcripts.
//!
//! cargo run -p recorder-core --example des_spotting

use recorder_core::enrich::spot_des;
use recorder_core::model::{DesPhrases, Span, Speaker, Transcript};

fn main() {
    let lines = [
        (0, "okay so start ziggy I feel"),
        (1_500, "a little tired but focused"),
        (3_000, "end ziggy back to work"),
        (9_000, "Start Ziggy, the music is loud"),
    ];
    let transcripts: Vec<(u64, Transcript)> = lines
        .iter()
        .map(|&(t, text)| {
            let tr = Transcript {
                text: text.into(),
                speaker: Speaker::Wearer,
                span: Span::new(t, t + 1_400),
            };
            (t, tr)
        })
        .collect();
    for r in spot_des(&transcripts, &DesPhrases::default()) {
        let d = &r.report;
        println!(
            "[{}..{} ms, terminated={}] {:?}",
            d.span.start_ms, d.span.end_ms, d.terminated, d.text
        );
    }
}
