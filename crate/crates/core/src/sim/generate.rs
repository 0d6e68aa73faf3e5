//! Ready-made scenarios: a fixed demo timeline and seeded random ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    Cognition, EyeAction, FaceAction, FacialExpression, LowerFaceAction, Speaker, UpperFaceAction,
    EEG_CHANNELS,
};

use super::driver::sub_seed;
use super::scenario::{EventKind, NormBox, ScenarioScript};

const WORDS: &[&str] = &[
    "i", "love", "this", "coffee", "the", "meeting", "was", "awful", "today", "feel", "calm",
    "tired", "happy", "great", "bad", "we", "should", "walk", "outside", "maybe", "later", "sad",
    "good", "window", "train", "late", "nice",
];
const LABELS: &[&str] = &["burger", "laptop", "cup", "bicycle", "tree", "door"];
const SIGNS: &[&str] = &["EXIT", "OPEN", "PLATFORM 2", "SALE", "NO ENTRY"];
const PEOPLE: &[&str] = &["person-a", "person-b", "person-c", "person-d"];

/// The scenario used by `record` when none is given.
pub fn demo_scenario(seed: u64, duration_ms: u64) -> ScenarioScript {
    let mut s = ScenarioScript::new(seed, duration_ms);
    let d = duration_ms;
    let at = |frac: f64| (d as f64 * frac) as u64;
    let span = |from: f64, to: f64| at(to).saturating_sub(at(from)).max(1);
    s.push(
        at(0.05),
        EventKind::Utterance {
            text: "good morning I love this coffee".into(),
            speaker: Speaker::Wearer,
            duration_ms: None,
        },
    );
    s.push(
        at(0.12),
        EventKind::Utterance {
            text: "morning how are you".into(),
            speaker: Speaker::Other,
            duration_ms: None,
        },
    );
    s.push(
        at(0.3),
        EventKind::Utterance {
            text: "start ziggy I feel calm but a little tired end ziggy".into(),
            speaker: Speaker::Wearer,
            duration_ms: None,
        },
    );
    s.push(
        at(0.6),
        EventKind::Utterance {
            text: "that meeting was awful".into(),
            speaker: Speaker::Wearer,
            duration_ms: None,
        },
    );
    s.push(
        at(0.1),
        EventKind::Face {
            person_id: "person-a".into(),
            signature: None,
            bbox: NormBox::new(0.1, 0.2, 0.2, 0.3),
            span_ms: span(0.1, 0.5),
        },
    );
    s.push(
        at(0.4),
        EventKind::Face {
            person_id: "person-b".into(),
            signature: None,
            bbox: NormBox::new(0.6, 0.25, 0.18, 0.28),
            span_ms: span(0.4, 0.8),
        },
    );
    s.push(
        at(0.2),
        EventKind::SceneText {
            value: "EXIT".into(),
            bbox: NormBox::new(0.4, 0.05, 0.2, 0.1),
            span_ms: span(0.2, 0.35),
        },
    );
    s.push(
        at(0.5),
        EventKind::SceneObject {
            label: "burger".into(),
            bbox: NormBox::new(0.35, 0.6, 0.25, 0.25),
            span_ms: span(0.5, 0.7),
        },
    );
    s.push(at(0.15), EventKind::GsrEvent { amplitude_us: 3.0 });
    s.push(
        at(0.25),
        EventKind::EegTone {
            freq_hz: 10.0,
            channels: vec![0, 1, 2, 3],
            span_ms: span(0.25, 0.5),
            amplitude_uv: 10.0,
        },
    );
    s.push(
        at(0.1),
        EventKind::CognitionSet {
            values: Cognition {
                stress: 0.9,
                ..Cognition::NEUTRAL
            },
            span_ms: span(0.1, 0.25),
        },
    );
    s.push(
        at(0.05),
        EventKind::ExpressionSet {
            expression: FacialExpression {
                eye_action: EyeAction::Blink,
                upper_face: FaceAction {
                    action: UpperFaceAction::Neutral,
                    power: 0.0,
                },
                lower_face: FaceAction {
                    action: LowerFaceAction::Smile,
                    power: 0.8,
                },
            },
            span_ms: span(0.05, 0.15),
        },
    );
    s
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.random::<f64>() * 1000.0).round() / 1000.0
}

fn random_box(rng: &mut ChaCha8Rng) -> NormBox {
    let w = 0.05 + unit(rng) * 0.3;
    let h = 0.05 + unit(rng) * 0.3;
    let x = unit(rng) * (1.0 - w);
    let y = unit(rng) * (1.0 - h);
    NormBox::new(x, y, w, h)
}

fn random_phrase(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(1..=8);
    let mut words: Vec<&str> = (0..n)
        .map(|_| WORDS[rng.random_range(0..WORDS.len())])
        .collect();
    match rng.random_range(0..6) {
        0 => {
            words.insert(0, "start ziggy");
            words.push("end ziggy");
        }
        1 => words.insert(0, "Start Ziggy"),
        2 => words.push("END ZIGGY"),
        _ => {}
    }
    words.join(" ")
}

/// A valid scenario with `events` random events, fully determined by `seed`.
pub fn random_scenario(seed: u64, duration_ms: u64, events: usize) -> ScenarioScript {
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, "scenario"));
    let mut s = ScenarioScript::new(seed, duration_ms);
    s.eeg_noise_uv = 2.0 + unit(&mut rng) * 10.0;
    s.gsr_baseline_us = 2.0 + unit(&mut rng) * 20.0;
    for _ in 0..events {
        let at = rng.random_range(0..duration_ms.max(1));
        let span = rng.random_range(1..=(duration_ms - at).max(1));
        let kind = match rng.random_range(0..8) {
            0 => EventKind::Utterance {
                text: random_phrase(&mut rng),
                speaker: if rng.random_bool(0.6) {
                    Speaker::Wearer
                } else {
                    Speaker::Other
                },
                duration_ms: None,
            },
            1 => EventKind::Face {
                person_id: PEOPLE[rng.random_range(0..PEOPLE.len())].into(),
                signature: None,
                bbox: random_box(&mut rng),
                span_ms: span,
            },
            2 => EventKind::SceneText {
                value: SIGNS[rng.random_range(0..SIGNS.len())].into(),
                bbox: random_box(&mut rng),
                span_ms: span,
            },
            3 => EventKind::SceneObject {
                label: LABELS[rng.random_range(0..LABELS.len())].into(),
                bbox: random_box(&mut rng),
                span_ms: span,
            },
            4 => EventKind::GsrEvent {
                amplitude_us: unit(&mut rng) * 5.0,
            },
            5 => {
                let n = rng.random_range(1..=4);
                let mut channels: Vec<usize> =
                    (0..n).map(|_| rng.random_range(0..EEG_CHANNELS)).collect();
                channels.sort_unstable();
                channels.dedup();
                EventKind::EegTone {
                    freq_hz: 1.0 + unit(&mut rng) * 60.0,
                    channels,
                    span_ms: span,
                    amplitude_uv: unit(&mut rng) * 20.0,
                }
            }
            6 => EventKind::CognitionSet {
                values: Cognition {
                    engagement: unit(&mut rng),
                    excitement: unit(&mut rng),
                    stress: unit(&mut rng),
                    relaxation: unit(&mut rng),
                    interest: unit(&mut rng),
                    focus: unit(&mut rng),
                },
                span_ms: span,
            },
            _ => EventKind::ExpressionSet {
                expression: FacialExpression {
                    eye_action: EyeAction::LookLeft,
                    upper_face: FaceAction {
                        action: UpperFaceAction::Frown,
                        power: unit(&mut rng),
                    },
                    lower_face: FaceAction {
                        action: LowerFaceAction::Clench,
                        power: unit(&mut rng),
                    },
                },
                span_ms: span,
            },
        };
        s.push(at, kind);
    }
    s
}
