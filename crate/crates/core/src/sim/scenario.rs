//! Deterministic stimulus timelines.

use serde::{Deserialize, Serialize};

use crate::model::validate::ValidationReport;
use crate::model::{Cognition, FacialExpression, SessionConfig, Speaker, EEG_CHANNELS};

/// Default tone amplitude in microvolts.
pub const TONE_AMPLITUDE_UV: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioScript {
    pub seed: u64,
    pub duration_ms: u64,
    /// RMS of the background EEG noise per channel.
    #[serde(default = "default_eeg_noise")]
    pub eeg_noise_uv: f64,
    #[serde(default = "default_gsr_baseline")]
    pub gsr_baseline_us: f64,
    /// Standard deviation of the per-sample GSR random-walk step.
    #[serde(default = "default_gsr_step")]
    pub gsr_walk_step_us: f64,
    pub events: Vec<ScenarioEvent>,
}

fn default_eeg_noise() -> f64 {
    8.0
}
fn default_gsr_baseline() -> f64 {
    5.0
}
fn default_gsr_step() -> f64 {
    0.05
}
fn default_tone_amplitude() -> f64 {
    TONE_AMPLITUDE_UV
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEvent {
    pub at_ms: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Box in frame-relative coordinates, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl NormBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        NormBox { x, y, w, h }
    }

    fn is_valid(&self) -> bool {
        let parts = [self.x, self.y, self.w, self.h];
        parts
            .iter()
            .all(|v| v.is_finite() && (0.0..=1.0).contains(v))
            && self.w > 0.0
            && self.h > 0.0
            && self.x + self.w <= 1.0 + 1e-9
            && self.y + self.h <= 1.0 + 1e-9
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventKind {
    Utterance {
        text: String,
        speaker: Speaker,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        duration_ms: Option<u64>,
    },
    Face {
        person_id: String,
        /// Matcher token; defaults to the person id.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        signature: Option<String>,
        #[serde(rename = "box")]
        bbox: NormBox,
        span_ms: u64,
    },
    SceneText {
        value: String,
        #[serde(rename = "box")]
        bbox: NormBox,
        span_ms: u64,
    },
    SceneObject {
        label: String,
        #[serde(rename = "box")]
        bbox: NormBox,
        span_ms: u64,
    },
    GsrEvent {
        amplitude_us: f64,
    },
    EegTone {
        freq_hz: f64,
        channels: Vec<usize>,
        span_ms: u64,
        #[serde(default = "default_tone_amplitude")]
        amplitude_uv: f64,
    },
    CognitionSet {
        values: Cognition,
        span_ms: u64,
    },
    ExpressionSet {
        expression: FacialExpression,
        span_ms: u64,
    },
}

impl EventKind {
    pub fn span_ms(&self) -> Option<u64> {
        match self {
            EventKind::Face { span_ms, .. }
            | EventKind::SceneText { span_ms, .. }
            | EventKind::SceneObject { span_ms, .. }
            | EventKind::EegTone { span_ms, .. }
            | EventKind::CognitionSet { span_ms, .. }
            | EventKind::ExpressionSet { span_ms, .. } => Some(*span_ms),
            EventKind::Utterance { .. } | EventKind::GsrEvent { .. } => None,
        }
    }
}

impl ScenarioEvent {
    pub fn new(at_ms: u64, kind: EventKind) -> Self {
        ScenarioEvent { at_ms, kind }
    }

    /// Whether a span event covers `t_ms` (half-open interval).
    pub fn active_at(&self, t_ms: u64) -> bool {
        match self.kind.span_ms() {
            Some(span) => t_ms >= self.at_ms && t_ms < self.at_ms + span,
            None => false,
        }
    }
}

/// Spoken length of an utterance when the script gives none.
pub fn estimated_utterance_ms(text: &str) -> u64 {
    let words = text.split_whitespace().count() as u64;
    (words * 350).max(500)
}

impl ScenarioScript {
    pub fn new(seed: u64, duration_ms: u64) -> Self {
        ScenarioScript {
            seed,
            duration_ms,
            eeg_noise_uv: default_eeg_noise(),
            gsr_baseline_us: default_gsr_baseline(),
            gsr_walk_step_us: default_gsr_step(),
            events: Vec::new(),
        }
    }

    /// Builder helper; keeps events ordered by `at_ms` (stable).
    pub fn with_event(mut self, at_ms: u64, kind: EventKind) -> Self {
        self.push(at_ms, kind);
        self
    }

    pub fn push(&mut self, at_ms: u64, kind: EventKind) {
        let idx = self.events.partition_point(|e| e.at_ms <= at_ms);
        self.events.insert(idx, ScenarioEvent::new(at_ms, kind));
    }

    /// Changes the length; events that no longer fit are left for
    /// validation to report.
    pub fn with_duration(mut self, duration_ms: u64) -> Self {
        self.duration_ms = duration_ms;
        self
    }

    pub fn validate(&self, config: &SessionConfig) -> ValidationReport {
        let mut r = ValidationReport::default();
        if self.duration_ms == 0 {
            r.push("duration_ms", "positive");
        }
        if !(self.eeg_noise_uv.is_finite() && self.eeg_noise_uv >= 0.0) {
            r.push("eeg_noise_uv", "non-negative");
        }
        if !(self.gsr_baseline_us.is_finite() && (1.0..=30.0).contains(&self.gsr_baseline_us)) {
            r.push("gsr_baseline_us", "range [1,30]");
        }
        if !(self.gsr_walk_step_us.is_finite() && self.gsr_walk_step_us >= 0.0) {
            r.push("gsr_walk_step_us", "non-negative");
        }
        let nyquist = config.eeg.rate / 2.0;
        let mut prev = 0;
        for (i, ev) in self.events.iter().enumerate() {
            let path = format!("events[{i}]");
            if ev.at_ms < prev {
                r.push(format!("{path}.at_ms"), "sorted events");
            }
            prev = ev.at_ms;
            if ev.at_ms >= self.duration_ms {
                r.push(format!("{path}.at_ms"), "within duration");
            }
            if let Some(span) = ev.kind.span_ms() {
                if span == 0 {
                    r.push(format!("{path}.span_ms"), "positive");
                }
                if ev.at_ms.saturating_add(span) > self.duration_ms {
                    r.push(format!("{path}.span_ms"), "within duration");
                }
            }
            match &ev.kind {
                EventKind::Utterance {
                    text, duration_ms, ..
                } => {
                    if text.trim().is_empty() {
                        r.push(format!("{path}.text"), "non-empty");
                    }
                    if *duration_ms == Some(0) {
                        r.push(format!("{path}.duration_ms"), "positive");
                    }
                }
                EventKind::Face {
                    person_id, bbox, ..
                } => {
                    if person_id.is_empty() {
                        r.push(format!("{path}.person_id"), "non-empty");
                    }
                    if !bbox.is_valid() {
                        r.push(format!("{path}.box"), "unit box");
                    }
                }
                EventKind::SceneText { bbox, .. } | EventKind::SceneObject { bbox, .. } => {
                    if !bbox.is_valid() {
                        r.push(format!("{path}.box"), "unit box");
                    }
                }
                EventKind::GsrEvent { amplitude_us } => {
                    if !(amplitude_us.is_finite() && *amplitude_us >= 0.0) {
                        r.push(format!("{path}.amplitude_us"), "non-negative");
                    }
                }
                EventKind::EegTone {
                    freq_hz,
                    channels,
                    amplitude_uv,
                    ..
                } => {
                    if !(freq_hz.is_finite() && *freq_hz > 0.0) {
                        r.push(format!("{path}.freq_hz"), "positive");
                    } else if *freq_hz >= nyquist {
                        r.push(format!("{path}.freq_hz"), "below nyquist");
                    }
                    if channels.is_empty() || channels.iter().any(|c| *c >= EEG_CHANNELS) {
                        r.push(format!("{path}.channels"), "channel index");
                    }
                    if !(amplitude_uv.is_finite() && *amplitude_uv >= 0.0) {
                        r.push(format!("{path}.amplitude_uv"), "non-negative");
                    }
                }
                EventKind::CognitionSet { values, .. } => {
                    for (name, v) in values.named() {
                        if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                            r.push(format!("{path}.values.{name}"), "range [0,1]");
                        }
                    }
                }
                EventKind::ExpressionSet { expression, .. } => {
                    for (name, v) in [
                        ("upper_face.power", expression.upper_face.power),
                        ("lower_face.power", expression.lower_face.power),
                    ] {
                        if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                            r.push(format!("{path}.expression.{name}"), "range [0,1]");
                        }
                    }
                }
            }
        }
        r
    }
}
