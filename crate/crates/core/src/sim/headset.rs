//! Headset-service streams: facial expression and cognition metrics.
//!
//! Values follow the most recently started active `cognition_set` /
//! `expression_set` event and fall back to neutral defaults.

use crate::model::{Cognition, FacialExpression, Payload, SampleEnvelope, SessionConfig, StreamId};

use super::driver::{Capture, Schedule, SensorDriver};
use super::scenario::{EventKind, ScenarioEvent, ScenarioScript};

pub struct HeadsetStateDriver {
    facial: Schedule,
    cognition: Schedule,
    rate: f64,
    end_ms: u64,
    facial_on: bool,
    cognition_on: bool,
    streams: Vec<StreamId>,
    events: Vec<ScenarioEvent>,
}

impl HeadsetStateDriver {
    pub fn new(config: &SessionConfig, scenario: &ScenarioScript) -> Self {
        let facial_on = config.enabled(StreamId::FacialExpression);
        let cognition_on = config.enabled(StreamId::Cognition);
        let mut streams = Vec::new();
        if facial_on {
            streams.push(StreamId::FacialExpression);
        }
        if cognition_on {
            streams.push(StreamId::Cognition);
        }
        HeadsetStateDriver {
            facial: Schedule::new(config.headset.rate),
            cognition: Schedule::new(config.headset.rate),
            rate: config.headset.rate,
            end_ms: scenario.duration_ms,
            facial_on,
            cognition_on,
            streams,
            events: scenario
                .events
                .iter()
                .filter(|e| {
                    matches!(
                        e.kind,
                        EventKind::CognitionSet { .. } | EventKind::ExpressionSet { .. }
                    )
                })
                .cloned()
                .collect(),
        }
    }

    pub fn cognition_at(&self, t_ms: u64) -> Cognition {
        self.events
            .iter()
            .rev()
            .filter(|e| e.active_at(t_ms))
            .find_map(|e| match &e.kind {
                EventKind::CognitionSet { values, .. } => Some(*values),
                _ => None,
            })
            .unwrap_or(Cognition::NEUTRAL)
    }

    pub fn expression_at(&self, t_ms: u64) -> FacialExpression {
        self.events
            .iter()
            .rev()
            .filter(|e| e.active_at(t_ms))
            .find_map(|e| match &e.kind {
                EventKind::ExpressionSet { expression, .. } => Some(*expression),
                _ => None,
            })
            .unwrap_or_default()
    }
}

impl SensorDriver for HeadsetStateDriver {
    fn streams(&self) -> &[StreamId] {
        &self.streams
    }

    fn nominal_rates(&self) -> Vec<(StreamId, f64)> {
        self.streams.iter().map(|s| (*s, self.rate)).collect()
    }

    fn next_batch(&mut self, now_ms: u64) -> Vec<Capture> {
        let mut out = Vec::new();
        if self.facial_on {
            while let Some((k, t)) = self.facial.pop_due(now_ms, self.end_ms) {
                let p = Payload::FacialExpression(self.expression_at(t));
                out.push(Capture::plain(SampleEnvelope::new(t, k, p)));
            }
        }
        if self.cognition_on {
            while let Some((k, t)) = self.cognition.pop_due(now_ms, self.end_ms) {
                let p = Payload::Cognition(self.cognition_at(t));
                out.push(Capture::plain(SampleEnvelope::new(t, k, p)));
            }
        }
        out
    }
}
