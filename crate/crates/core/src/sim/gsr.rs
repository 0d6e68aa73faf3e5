//! Skin conductance: a clamped random walk plus event-locked responses.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::{Gsr, Payload, SampleEnvelope, SessionConfig, StreamId};

use super::driver::{sub_seed, Capture, Schedule, SensorDriver};
use super::scenario::{EventKind, ScenarioScript};

pub const GSR_MIN_US: f64 = 1.0;
pub const GSR_MAX_US: f64 = 30.0;
pub const SCR_RISE_MS: f64 = 1_000.0;
pub const SCR_DECAY_MS: f64 = 4_000.0;

/// Skin-conductance response `dt_ms` after onset: linear rise to
/// `amplitude` over 1 s, then exponential decay with a 4 s time constant.
pub fn scr_bump(amplitude: f64, dt_ms: f64) -> f64 {
    if dt_ms < 0.0 {
        0.0
    } else if dt_ms <= SCR_RISE_MS {
        amplitude * dt_ms / SCR_RISE_MS
    } else {
        amplitude * (-(dt_ms - SCR_RISE_MS) / SCR_DECAY_MS).exp()
    }
}

pub struct GsrDriver {
    schedule: Schedule,
    rate: f64,
    end_ms: u64,
    level: f64,
    step_us: f64,
    rng: ChaCha8Rng,
    events: Vec<(u64, f64)>,
}

impl GsrDriver {
    pub fn new(config: &SessionConfig, scenario: &ScenarioScript) -> Self {
        let events = scenario
            .events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::GsrEvent { amplitude_us } => Some((e.at_ms, amplitude_us)),
                _ => None,
            })
            .collect();
        GsrDriver {
            schedule: Schedule::new(config.gsr.rate),
            rate: config.gsr.rate,
            end_ms: scenario.duration_ms,
            level: scenario.gsr_baseline_us,
            step_us: scenario.gsr_walk_step_us,
            rng: ChaCha8Rng::seed_from_u64(sub_seed(scenario.seed, "gsr")),
            events,
        }
    }

    fn sample(&mut self, t_ms: u64) -> f64 {
        let g: f64 = StandardNormal.sample(&mut self.rng);
        self.level = (self.level + g * self.step_us).clamp(GSR_MIN_US, GSR_MAX_US);
        let bumps: f64 = self
            .events
            .iter()
            .map(|&(at, amp)| scr_bump(amp, t_ms as f64 - at as f64))
            .sum();
        let v = (self.level + bumps).clamp(GSR_MIN_US, GSR_MAX_US);
        (v * 1000.0).round() / 1000.0
    }
}

impl SensorDriver for GsrDriver {
    fn streams(&self) -> &[StreamId] {
        &[StreamId::Gsr]
    }

    fn nominal_rates(&self) -> Vec<(StreamId, f64)> {
        vec![(StreamId::Gsr, self.rate)]
    }

    fn next_batch(&mut self, now_ms: u64) -> Vec<Capture> {
        let mut out = Vec::new();
        while let Some((k, t)) = self.schedule.pop_due(now_ms, self.end_ms) {
            let conductance_us = self.sample(t);
            out.push(Capture::plain(SampleEnvelope::new(
                t,
                k,
                Payload::Gsr(Gsr { conductance_us }),
            )));
        }
        out
    }
}
