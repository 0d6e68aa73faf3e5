//! Capture loop: polls drivers against a clock and delivers a merged,
//! time-ordered stream to a sink.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::model::{canonical, StreamId};

use super::driver::{Capture, SensorDriver};

pub const DEFAULT_STEP_MS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ClockMode {
    /// Advance as fast as the sink allows.
    Virtual { step_ms: u64 },
    /// Sleep between polls; `speed` > 1 runs faster than real time.
    RealTime { step_ms: u64, speed: f64 },
}

impl Default for ClockMode {
    fn default() -> Self {
        ClockMode::Virtual {
            step_ms: DEFAULT_STEP_MS,
        }
    }
}

impl ClockMode {
    fn step_ms(&self) -> u64 {
        match *self {
            ClockMode::Virtual { step_ms } | ClockMode::RealTime { step_ms, .. } => step_ms.max(1),
        }
    }
}

/// Maps session-relative milliseconds onto wall-clock time.
#[derive(Debug, Clone, Copy)]
pub struct ClockMap {
    pub wall_origin: DateTime<Utc>,
    pub monotonic_origin: Instant,
}

impl ClockMap {
    pub fn start() -> Self {
        ClockMap {
            wall_origin: Utc::now(),
            monotonic_origin: Instant::now(),
        }
    }

    pub fn now_ms(&self) -> u64 {
        self.monotonic_origin.elapsed().as_millis() as u64
    }

    pub fn to_utc(&self, t_ms: u64) -> DateTime<Utc> {
        self.wall_origin + chrono::Duration::milliseconds(t_ms as i64)
    }
}

pub type SinkError = Box<dyn std::error::Error + Send + Sync>;

pub trait CaptureSink {
    fn accept(&mut self, capture: Capture) -> Result<(), SinkError>;
}

impl<F: FnMut(Capture) -> Result<(), SinkError>> CaptureSink for F {
    fn accept(&mut self, capture: Capture) -> Result<(), SinkError> {
        self(capture)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StreamRunStats {
    pub count: u64,
    /// Canonical envelope bytes plus media bytes.
    pub bytes: u64,
    pub media_bytes: u64,
    pub achieved_kb_per_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub duration_ms: u64,
    pub streams: BTreeMap<StreamId, StreamRunStats>,
}

impl RunReport {
    pub fn count(&self, stream: StreamId) -> u64 {
        self.streams.get(&stream).map_or(0, |s| s.count)
    }

    pub fn is_empty(&self) -> bool {
        self.streams.is_empty()
    }

    fn record(&mut self, capture: &Capture) {
        let env_bytes = canonical::to_vec(&capture.envelope).map_or(0, |b| b.len() as u64);
        let media = capture.envelope.payload.media().map_or(0, |m| m.byte_len);
        let s = self.streams.entry(capture.envelope.stream()).or_default();
        s.count += 1;
        s.bytes += env_bytes + media;
        s.media_bytes += media;
    }

    fn finalize(&mut self, duration_ms: u64) {
        self.duration_ms = duration_ms;
        for s in self.streams.values_mut() {
            s.achieved_kb_per_s = if duration_ms == 0 {
                0.0
            } else {
                s.bytes as f64 / 1000.0 / (duration_ms as f64 / 1000.0)
            };
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("sink rejected a capture at t_ms={t_ms}: {source}")]
pub struct RunError {
    pub t_ms: u64,
    pub partial: RunReport,
    #[source]
    pub source: SinkError,
}

struct Pending(Capture);

impl Pending {
    fn key(&self) -> (u64, StreamId, u64) {
        self.0.envelope.order_key()
    }
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    // Reversed so the max-heap pops the earliest capture.
    fn cmp(&self, other: &Self) -> Ordering {
        other.key().cmp(&self.key())
    }
}

struct Merger<'a, S: CaptureSink + ?Sized> {
    heap: BinaryHeap<Pending>,
    sink: &'a mut S,
    report: RunReport,
}

impl<S: CaptureSink + ?Sized> Merger<'_, S> {
    fn release(&mut self, upto: Option<u64>) -> Result<(), (u64, SinkError)> {
        while let Some(top) = self.heap.peek() {
            let t = top.0.envelope.t_ms;
            if upto.is_some_and(|w| t > w) {
                break;
            }
            let Pending(capture) = self.heap.pop().expect("peeked");
            self.report.record(&capture);
            self.sink.accept(capture).map_err(|e| (t, e))?;
        }
        Ok(())
    }
}

/// Runs `drivers` for `duration_ms` of session time.
///
/// Captures are buffered until no driver can still produce an earlier one
/// (given each driver's declared latency) and then delivered in
/// `(t_ms, stream, seq)` order. Setting `stop` ends the session early at
/// the current clock value.
pub fn run_drivers<S: CaptureSink + ?Sized>(
    drivers: &mut [Box<dyn SensorDriver>],
    duration_ms: u64,
    mode: ClockMode,
    sink: &mut S,
    stop: Option<&AtomicBool>,
) -> Result<RunReport, RunError> {
    let max_latency = drivers.iter().map(|d| d.latency_ms()).max().unwrap_or(0);
    let step = mode.step_ms();
    let started = Instant::now();
    let mut merger = Merger {
        heap: BinaryHeap::new(),
        sink,
        report: RunReport::default(),
    };
    let fail = |merger: Merger<'_, S>, (t_ms, source): (u64, SinkError), now: u64| {
        let mut partial = merger.report;
        partial.finalize(now);
        RunError {
            t_ms,
            partial,
            source,
        }
    };

    let mut now = 0;
    let mut end = duration_ms;
    loop {
        if let ClockMode::RealTime { speed, .. } = mode {
            let due = Duration::from_secs_f64(now as f64 / 1000.0 / speed.max(1e-6));
            if let Some(wait) = due.checked_sub(started.elapsed()) {
                std::thread::sleep(wait);
            }
        }
        if stop.is_some_and(|s| s.load(AtomicOrdering::SeqCst)) {
            end = now.min(duration_ms);
            break;
        }
        for d in drivers.iter_mut() {
            merger
                .heap
                .extend(d.next_batch(now).into_iter().map(Pending));
        }
        if now >= end {
            break;
        }
        if let Some(watermark) = now.checked_sub(max_latency) {
            if let Err(e) = merger.release(Some(watermark)) {
                return Err(fail(merger, e, now));
            }
        }
        now = (now + step).min(end);
    }
    for d in drivers.iter_mut() {
        merger.heap.extend(d.finish(end).into_iter().map(Pending));
    }
    if let Err(e) = merger.release(None) {
        return Err(fail(merger, e, end));
    }
    let mut report = merger.report;
    report.finalize(end);
    Ok(report)
}
