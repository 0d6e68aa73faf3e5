//! Hand-labelled DES bracketing corpus.

use recorder_core::enrich::spot_des;
use recorder_core::model::{DesPhrases, Span, Speaker, Transcript};
use serde::Deserialize;

#[derive(Deserialize)]
struct Corpus {
    phrases: DesPhrases,
    cases: Vec<Case>,
}

#[derive(Deserialize)]
struct Case {
    name: String,
    transcripts: Vec<Line>,
    expected: Vec<Expected>,
}

#[derive(Deserialize)]
struct Line {
    text: String,
    start_ms: u64,
    end_ms: u64,
}

#[derive(Debug, PartialEq, Deserialize)]
struct Expected {
    text: String,
    start_ms: u64,
    end_ms: u64,
    terminated: bool,
}

#[test]
fn corpus_matches_hand_labels() {
    let corpus: Corpus = serde_json::from_str(include_str!("fixtures/des_corpus.json")).unwrap();
    assert_eq!(corpus.cases.len(), 20);
    let mut failures = Vec::new();
    for case in &corpus.cases {
        let input: Vec<(u64, Transcript)> = case
            .transcripts
            .iter()
            .map(|l| {
                (
                    l.start_ms,
                    Transcript {
                        text: l.text.clone(),
                        speaker: Speaker::Wearer,
                        span: Span::new(l.start_ms, l.end_ms),
                    },
                )
            })
            .collect();
        let got: Vec<Expected> = spot_des(&input, &corpus.phrases)
            .into_iter()
            .map(|r| Expected {
                text: r.report.text,
                start_ms: r.report.span.start_ms,
                end_ms: r.report.span.end_ms,
                terminated: r.report.terminated,
            })
            .collect();
        if got != case.expected {
            failures.push(format!("{}: got {:?}", case.name, got));
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}
