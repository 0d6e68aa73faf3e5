//! 14-channel scalp EEG.
//!
//! Background activity is the sum of three first-order autoregressive
//! processes (poles 0.98, 0.85, 0.3), which gives a roughly 1/f spectrum,
//! scaled to the scenario's RMS. Tone events add `A sin(2 pi f t)` on the
//! listed channels while active. Values are quantised to 0.001 uV.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::{EegRaw, Payload, SampleEnvelope, SessionConfig, StreamId, EEG_CHANNELS};

use super::driver::{sub_seed, Capture, Schedule, SensorDriver};
use super::scenario::{EventKind, ScenarioScript};

const POLES: [f64; 3] = [0.98, 0.85, 0.3];
/// Quantisation steps per microvolt.
pub const EEG_STEPS_PER_UV: f64 = 1000.0;

struct Tone {
    start: u64,
    end: u64,
    freq_hz: f64,
    amplitude_uv: f64,
    channels: Vec<usize>,
}

pub struct EegDriver {
    schedule: Schedule,
    rate: f64,
    end_ms: u64,
    noise_uv: f64,
    rng: ChaCha8Rng,
    state: [[f64; 3]; EEG_CHANNELS],
    tones: Vec<Tone>,
}

impl EegDriver {
    pub fn new(config: &SessionConfig, scenario: &ScenarioScript) -> Self {
        let tones = scenario
            .events
            .iter()
            .filter_map(|e| match &e.kind {
                EventKind::EegTone {
                    freq_hz,
                    channels,
                    span_ms,
                    amplitude_uv,
                } => Some(Tone {
                    start: e.at_ms,
                    end: e.at_ms + span_ms,
                    freq_hz: *freq_hz,
                    amplitude_uv: *amplitude_uv,
                    channels: channels.clone(),
                }),
                _ => None,
            })
            .collect();
        EegDriver {
            schedule: Schedule::new(config.eeg.rate),
            rate: config.eeg.rate,
            end_ms: scenario.duration_ms,
            noise_uv: scenario.eeg_noise_uv,
            rng: ChaCha8Rng::seed_from_u64(sub_seed(scenario.seed, "eeg")),
            state: [[0.0; 3]; EEG_CHANNELS],
            tones,
        }
    }

    fn sample(&mut self, k: u64, t_ms: u64) -> Vec<f64> {
        // Equal variance per component after normalising by sqrt(3).
        let scale = self.noise_uv / 3f64.sqrt();
        let mut out = vec![0.0; EEG_CHANNELS];
        for (ch, value) in out.iter_mut().enumerate() {
            let mut v = 0.0;
            for (i, pole) in POLES.iter().enumerate() {
                let g: f64 = StandardNormal.sample(&mut self.rng);
                let s = pole * self.state[ch][i] + (1.0 - pole * pole).sqrt() * g;
                self.state[ch][i] = s;
                v += s;
            }
            *value = v * scale;
        }
        let t_s = k as f64 / self.rate;
        for tone in &self.tones {
            if t_ms >= tone.start && t_ms < tone.end {
                let s = tone.amplitude_uv * (2.0 * std::f64::consts::PI * tone.freq_hz * t_s).sin();
                for &ch in &tone.channels {
                    out[ch] += s;
                }
            }
        }
        for v in &mut out {
            *v = quantize(*v);
        }
        out
    }
}

fn quantize(v: f64) -> f64 {
    // Dividing a rounded integer keeps the shortest decimal form.
    let q = (v * EEG_STEPS_PER_UV).round() / EEG_STEPS_PER_UV;
    // Avoid writing "-0.0".
    if q == 0.0 {
        0.0
    } else {
        q
    }
}

impl SensorDriver for EegDriver {
    fn streams(&self) -> &[StreamId] {
        &[StreamId::EegRaw]
    }

    fn nominal_rates(&self) -> Vec<(StreamId, f64)> {
        vec![(StreamId::EegRaw, self.rate)]
    }

    fn next_batch(&mut self, now_ms: u64) -> Vec<Capture> {
        let mut out = Vec::new();
        while let Some((k, t)) = self.schedule.pop_due(now_ms, self.end_ms) {
            let channels = self.sample(k, t);
            out.push(Capture::plain(SampleEnvelope::new(
                t,
                k,
                Payload::EegRaw(EegRaw { channels }),
            )));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantization_is_exact_decimal() {
        assert_eq!(quantize(0.1234567), 0.123);
        assert_eq!(quantize(-0.0001), 0.0);
        assert_eq!(serde_json::to_string(&quantize(12.3456)).unwrap(), "12.346");
    }

    #[test]
    fn noise_rms_matches_request() {
        let cfg = SessionConfig::default();
        let mut sc = ScenarioScript::new(3, 60_000);
        sc.eeg_noise_uv = 10.0;
        let mut d = EegDriver::new(&cfg, &sc);
        let batch = d.next_batch(60_000);
        let mut sum = 0.0;
        let mut n = 0.0;
        for c in &batch {
            if let Payload::EegRaw(p) = &c.envelope.payload {
                for v in &p.channels {
                    sum += v * v;
                    n += 1.0;
                }
            }
        }
        let rms = (sum / n).sqrt();
        assert!((rms - 10.0).abs() < 1.5, "rms {rms}");
    }
}
