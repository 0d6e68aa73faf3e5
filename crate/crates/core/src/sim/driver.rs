use crate::model::{Rect, SampleEnvelope, Span, Speaker, StreamId};

use super::raster::Raster;

/// A source of envelopes, polled with a monotonically advancing clock.
///
/// `next_batch(now_ms)` returns every capture with `t_ms <= now_ms` not yet
/// returned. Per-stream sequence numbers are gap-free from zero.
pub trait SensorDriver: Send {
    fn streams(&self) -> &[StreamId];

    /// Nominal samples per second for each produced stream.
    fn nominal_rates(&self) -> Vec<(StreamId, f64)>;

    /// Upper bound on `now_ms - t_ms` for any capture at emission time.
    fn latency_ms(&self) -> u64 {
        0
    }

    fn next_batch(&mut self, now_ms: u64) -> Vec<Capture>;

    /// Emits whatever is still pending once the session ends at `end_ms`.
    /// Nothing at or after `end_ms` is returned.
    fn finish(&mut self, end_ms: u64) -> Vec<Capture> {
        let mut out = self.next_batch(end_ms);
        out.retain(|c| c.envelope.t_ms < end_ms);
        out
    }
}

/// An envelope plus out-of-band data that is never persisted as such.
#[derive(Debug, Clone)]
pub struct Capture {
    pub envelope: SampleEnvelope,
    pub sidecar: Option<Sidecar>,
}

impl Capture {
    pub fn plain(envelope: SampleEnvelope) -> Self {
        Capture {
            envelope,
            sidecar: None,
        }
    }
}

/// Raw media and scenario ground truth travelling beside an envelope.
///
/// Only redaction and the mock analyzers read this.
#[derive(Debug, Clone)]
pub enum Sidecar {
    Frame(RawFrame),
    Audio(RawAudio),
}

#[derive(Debug, Clone)]
pub struct RawFrame {
    pub pixels: Raster,
    pub truth: FrameTruth,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameTruth {
    pub faces: Vec<FaceTruth>,
    pub texts: Vec<(String, Rect)>,
    pub objects: Vec<(String, Rect)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceTruth {
    pub person_id: String,
    pub signature: String,
    pub bbox: Rect,
}

#[derive(Debug, Clone)]
pub struct RawAudio {
    pub bytes: Vec<u8>,
    pub utterances: Vec<UtteranceTruth>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceTruth {
    pub text: String,
    pub speaker: Speaker,
    pub span: Span,
}

/// Integer sample schedule: sample `k` lands at `floor(k * 1000 / rate)` ms.
#[derive(Debug, Clone, Copy)]
pub struct Schedule {
    rate: f64,
    pub next: u64,
}

impl Schedule {
    pub fn new(rate: f64) -> Self {
        Schedule { rate, next: 0 }
    }

    pub fn time_of(&self, k: u64) -> u64 {
        (k as f64 * 1000.0 / self.rate).floor() as u64
    }

    /// Pops the next sample index if it is due by `now_ms` and before `end_ms`.
    pub fn pop_due(&mut self, now_ms: u64, end_ms: u64) -> Option<(u64, u64)> {
        let t = self.time_of(self.next);
        if t <= now_ms && t < end_ms {
            let k = self.next;
            self.next += 1;
            Some((k, t))
        } else {
            None
        }
    }

    /// Number of samples in `[0, end_ms)`.
    pub fn count_before(&self, end_ms: u64) -> u64 {
        let mut n = ((end_ms as f64) * self.rate / 1000.0).floor() as u64;
        while self.time_of(n) < end_ms {
            n += 1;
        }
        while n > 0 && self.time_of(n - 1) >= end_ms {
            n -= 1;
        }
        n
    }
}

/// Derives an independent RNG seed per driver from the scenario seed.
pub fn sub_seed(seed: u64, salt: &str) -> u64 {
    // FNV-1a over the salt, folded with the seed through splitmix64.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in salt.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
