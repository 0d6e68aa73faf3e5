//! Microphone: constant-bitrate opaque chunks plus the utterances they contain.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{AudioChunk, MediaRef, Payload, SampleEnvelope, SessionConfig, Span, StreamId};

use super::driver::{sub_seed, Capture, RawAudio, SensorDriver, Sidecar, UtteranceTruth};
use super::scenario::{estimated_utterance_ms, EventKind, ScenarioScript};

pub const AUDIO_EXT: &str = "raw";

pub struct AudioDriver {
    chunk_ms: u64,
    end_ms: u64,
    bytes_per_s: f64,
    next_index: u64,
    seed: u64,
    utterances: Vec<(u64, UtteranceTruth)>,
}

impl AudioDriver {
    pub fn new(config: &SessionConfig, scenario: &ScenarioScript) -> Self {
        let utterances = scenario
            .events
            .iter()
            .filter_map(|e| match &e.kind {
                EventKind::Utterance {
                    text,
                    speaker,
                    duration_ms,
                } => {
                    let d = duration_ms.unwrap_or_else(|| estimated_utterance_ms(text));
                    let end = (e.at_ms + d).min(scenario.duration_ms).max(e.at_ms);
                    Some((
                        e.at_ms,
                        UtteranceTruth {
                            text: text.clone(),
                            speaker: *speaker,
                            span: Span::new(e.at_ms, end),
                        },
                    ))
                }
                _ => None,
            })
            .collect();
        AudioDriver {
            chunk_ms: config.audio.chunk_ms,
            end_ms: scenario.duration_ms,
            bytes_per_s: config.target_bytes_per_s(StreamId::AudioChunk),
            next_index: 0,
            seed: scenario.seed,
            utterances,
        }
    }

    fn start_of(&self, index: u64) -> u64 {
        index * self.chunk_ms
    }

    fn emit(&mut self, start: u64, end: u64) -> Capture {
        let k = self.next_index;
        self.next_index += 1;
        let duration_ms = end - start;
        let len = (self.bytes_per_s * duration_ms as f64 / 1000.0).round() as usize;
        let mut bytes = vec![0u8; len];
        ChaCha8Rng::seed_from_u64(sub_seed(self.seed, &format!("audio/{k}")))
            .fill_bytes(&mut bytes);
        let utterances = self
            .utterances
            .iter()
            .filter(|(at, _)| *at >= start && *at < end)
            .map(|(_, u)| u.clone())
            .collect();
        let payload = Payload::AudioChunk(AudioChunk {
            media: MediaRef::for_content(&bytes, AUDIO_EXT),
            duration_ms,
        });
        Capture {
            envelope: SampleEnvelope::new(start, k, payload),
            sidecar: Some(Sidecar::Audio(RawAudio { bytes, utterances })),
        }
    }
}

impl SensorDriver for AudioDriver {
    fn streams(&self) -> &[StreamId] {
        &[StreamId::AudioChunk]
    }

    fn nominal_rates(&self) -> Vec<(StreamId, f64)> {
        vec![(StreamId::AudioChunk, 1000.0 / self.chunk_ms as f64)]
    }

    /// A chunk is only complete once its whole window has elapsed.
    fn latency_ms(&self) -> u64 {
        self.chunk_ms
    }

    fn next_batch(&mut self, now_ms: u64) -> Vec<Capture> {
        let mut out = Vec::new();
        loop {
            let start = self.start_of(self.next_index);
            let end = start + self.chunk_ms;
            if end > now_ms || end > self.end_ms {
                break;
            }
            out.push(self.emit(start, end));
        }
        out
    }

    fn finish(&mut self, end_ms: u64) -> Vec<Capture> {
        let end_ms = end_ms.min(self.end_ms);
        let mut out = self.next_batch(end_ms);
        let start = self.start_of(self.next_index);
        if start < end_ms {
            out.push(self.emit(start, end_ms));
        }
        out
    }
}
