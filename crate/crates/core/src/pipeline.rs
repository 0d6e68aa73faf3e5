//! End-to-end recording: drivers, redaction, enrichment and storage.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use chrono::Utc;
use uuid::Uuid;

use crate::enrich::{
    blur_frame, sentiment_payload, BandPowerAnalyzer, BlurOutcome, Clients, DesSpotter,
};
use crate::integrity::{AttestationService, LocalAttestationService};
use crate::model::validate::{validate_config, ValidationReport};
use crate::model::{
    ConsentRegistry, Detections, Payload, QuarantineMarker, SampleEnvelope, SessionConfig,
    SessionManifest, Speaker, StreamId, Transcript, UnanalyzedMarker,
};
use crate::sim::{
    make_drivers, run_drivers, Capture, CaptureSink, ClockMode, RunReport, ScenarioScript,
    SensorDriver, Sidecar, SimError, SinkError,
};
use crate::store::{LiveHandle, SessionWriter, StoreError};

/// Receives every envelope after it has been persisted.
pub type LiveTap = Box<dyn FnMut(&SampleEnvelope) + Send>;

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("invalid config: {0}")]
    Config(ValidationReport),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("session aborted at t_ms={t_ms}: {reason}")]
    Aborted {
        t_ms: u64,
        reason: String,
        manifest: Box<SessionManifest>,
        partial: RunReport,
    },
}

/// Consumes captures in time order and persists the session.
pub struct Pipeline {
    writer: SessionWriter,
    config: SessionConfig,
    registry: ConsentRegistry,
    clients: Clients,
    next_seq: [u64; StreamId::ALL.len()],
    band: BandPowerAnalyzer,
    des: DesSpotter,
    /// Derived envelopes dated after the capture that produced them, held
    /// until the merged input reaches their time.
    pending: BinaryHeap<Reverse<Held>>,
    tap: Option<LiveTap>,
}

struct Held(SampleEnvelope);

impl PartialEq for Held {
    fn eq(&self, other: &Self) -> bool {
        self.0.order_key() == other.0.order_key()
    }
}
impl Eq for Held {}
impl PartialOrd for Held {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Held {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.cmp_order(&other.0)
    }
}

impl Pipeline {
    pub fn new(
        writer: SessionWriter,
        registry: ConsentRegistry,
        clients: Clients,
        tap: Option<LiveTap>,
    ) -> Self {
        let config = writer.manifest().config.clone();
        Pipeline {
            band: BandPowerAnalyzer::new(&config),
            des: DesSpotter::new(&config.des),
            writer,
            config,
            registry,
            clients,
            next_seq: [0; StreamId::ALL.len()],
            pending: BinaryHeap::new(),
            tap,
        }
    }

    pub fn writer(&self) -> &SessionWriter {
        &self.writer
    }

    /// Stamps the next per-stream seq and stores the envelope, or holds it
    /// if it is dated after `now`. Returns the assigned seq, or `None` if
    /// the stream is disabled.
    fn store_at(
        &mut self,
        now: u64,
        t_ms: u64,
        payload: Payload,
        media: Option<&[u8]>,
    ) -> Result<Option<u64>, StoreError> {
        let stream = payload.stream();
        if !self.config.enabled(stream) {
            return Ok(None);
        }
        let seq = self.next_seq[stream.index()];
        let env = SampleEnvelope::new(t_ms, seq, payload);
        if t_ms > now && media.is_none() {
            self.pending.push(Reverse(Held(env)));
        } else {
            self.persist(env, media)?;
        }
        self.next_seq[stream.index()] += 1;
        Ok(Some(seq))
    }

    fn store(
        &mut self,
        t_ms: u64,
        payload: Payload,
        media: Option<&[u8]>,
    ) -> Result<Option<u64>, StoreError> {
        self.store_at(t_ms, t_ms, payload, media)
    }

    fn persist(&mut self, env: SampleEnvelope, media: Option<&[u8]>) -> Result<(), StoreError> {
        self.writer.append(env.clone(), media)?;
        if let Some(tap) = self.tap.as_mut() {
            tap(&env);
        }
        Ok(())
    }

    /// Persists held envelopes that sort before `(t_ms, stream)`, or all
    /// of them when `upto` is `None`.
    fn release_held(&mut self, upto: Option<(u64, StreamId)>) -> Result<(), StoreError> {
        while let Some(Reverse(Held(top))) = self.pending.peek() {
            if upto.is_some_and(|key| (top.t_ms, top.stream()) >= key) {
                break;
            }
            let Reverse(Held(env)) = self.pending.pop().expect("peeked");
            self.persist(env, None)?;
        }
        Ok(())
    }

    fn unanalyzed(&mut self, stream: StreamId, seq: u64, analyzer: &str, reason: String) {
        log::warn!("{analyzer} failed on {stream} #{seq}: {reason}");
        self.writer.mark_unanalyzed(UnanalyzedMarker {
            stream,
            seq,
            analyzer: analyzer.to_string(),
            reason,
        });
    }

    fn on_frame(
        &mut self,
        t_ms: u64,
        payload: Payload,
        sidecar: Option<Sidecar>,
    ) -> Result<(), StoreError> {
        let (Payload::ImageFrame(frame), Some(Sidecar::Frame(raw))) = (payload, sidecar) else {
            // Without pixels there is nothing safe to persist.
            self.writer.mark_quarantined(QuarantineMarker {
                t_ms,
                reason: "frame without pixel data".into(),
            });
            return Ok(());
        };
        let detections = self.clients.faces.detect(&raw);
        let wearer = self.config.subject_id.clone();
        let outcome = blur_frame(
            &frame,
            &raw,
            detections,
            &self.registry,
            &wearer,
            self.config.blur,
        );
        let (redacted, encoded) = match outcome {
            BlurOutcome::Redacted { payload, encoded } => (payload, encoded),
            BlurOutcome::Quarantined { reason } => {
                log::warn!("frame at {t_ms} ms quarantined: {reason}");
                self.writer
                    .mark_quarantined(QuarantineMarker { t_ms, reason });
                return Ok(());
            }
        };
        let Some(seq) = self.store(t_ms, Payload::ImageFrame(redacted), Some(&encoded))? else {
            return Ok(());
        };
        if !(self.config.enabled(StreamId::ImageText) || self.config.enabled(StreamId::ImageLabels))
        {
            return Ok(());
        }
        match self.clients.image.analyze(&raw) {
            Ok(a) => {
                let texts = Detections {
                    detections: a.texts,
                    ref_frame_seq: seq,
                };
                let labels = Detections {
                    detections: a.labels,
                    ref_frame_seq: seq,
                };
                self.store(t_ms, Payload::ImageText(texts), None)?;
                self.store(t_ms, Payload::ImageLabels(labels), None)?;
            }
            Err(e) => self.unanalyzed(StreamId::ImageFrame, seq, "image-analysis", e.to_string()),
        }
        Ok(())
    }

    fn on_audio(
        &mut self,
        t_ms: u64,
        payload: Payload,
        sidecar: Option<Sidecar>,
    ) -> Result<(), StoreError> {
        let Some(Sidecar::Audio(raw)) = sidecar else {
            return Err(StoreError::Corrupt("audio chunk without bytes".into()));
        };
        let Some(seq) = self.store(t_ms, payload, Some(&raw.bytes))? else {
            return Ok(());
        };
        let utterances = match self.clients.transcriber.transcribe(&raw) {
            Ok(u) => u,
            Err(e) => {
                self.unanalyzed(StreamId::AudioChunk, seq, "transcribe", e.to_string());
                return Ok(());
            }
        };
        for u in utterances {
            let tt = u.span.start_ms.max(t_ms);
            let transcript = Transcript {
                text: u.text,
                speaker: u.speaker,
                span: u.span,
            };
            let stored = self.store_at(t_ms, tt, Payload::AudioText(transcript.clone()), None)?;
            if transcript.speaker != Speaker::Wearer {
                continue;
            }
            for r in self.des.push(tt, &transcript) {
                self.store_at(t_ms, r.t_ms, Payload::DesReport(r.report), None)?;
            }
            let Some(tseq) = stored else { continue };
            if !self.config.enabled(StreamId::SpeechSentiment) {
                continue;
            }
            match self.clients.sentiment.score(&transcript.text) {
                Ok(scores) => {
                    let p = Payload::SpeechSentiment(sentiment_payload(scores, tseq));
                    self.store_at(t_ms, tt, p, None)?;
                }
                Err(e) => self.unanalyzed(StreamId::AudioText, tseq, "sentiment", e.to_string()),
            }
        }
        Ok(())
    }

    pub fn ingest(&mut self, capture: Capture) -> Result<(), StoreError> {
        let Capture { envelope, sidecar } = capture;
        let t_ms = envelope.t_ms;
        self.release_held(Some((t_ms, envelope.stream())))?;
        match envelope.stream() {
            StreamId::ImageFrame => self.on_frame(t_ms, envelope.payload, sidecar),
            StreamId::AudioChunk => self.on_audio(t_ms, envelope.payload, sidecar),
            StreamId::EegRaw => {
                let derived = match &envelope.payload {
                    Payload::EegRaw(raw) if self.config.enabled(StreamId::EegBandpower) => {
                        self.band.push(raw)
                    }
                    _ => None,
                };
                if envelope.payload.floats().iter().all(|(_, v)| v.is_finite()) {
                    self.store(t_ms, envelope.payload, None)?;
                } else {
                    log::warn!("dropping non-finite EEG sample at {t_ms} ms");
                }
                if let Some(p) = derived {
                    self.store(t_ms, p, None)?;
                }
                Ok(())
            }
            _ => self.store(t_ms, envelope.payload, None).map(|_| ()),
        }
    }

    /// Flushes open analyzers and seals the session.
    pub fn finish(mut self, duration_ms: u64) -> Result<SessionManifest, StoreError> {
        if let Some(r) = self.des.finish() {
            self.store_at(u64::MAX, r.t_ms, Payload::DesReport(r.report), None)?;
        }
        self.release_held(None)?;
        self.writer.close(duration_ms)
    }

    pub fn abort(self, duration_ms: u64) -> SessionManifest {
        self.writer.abort(duration_ms)
    }
}

impl CaptureSink for Pipeline {
    fn accept(&mut self, capture: Capture) -> Result<(), SinkError> {
        self.ingest(capture).map_err(|e| Box::new(e) as SinkError)
    }
}

#[derive(Debug, Clone)]
pub struct RecordOutcome {
    pub dir: PathBuf,
    pub manifest: SessionManifest,
    pub run: RunReport,
}

/// Builder for one recording session.
pub struct Recorder {
    root: PathBuf,
    config: SessionConfig,
    scenario: ScenarioScript,
    session_id: Uuid,
    service: Arc<dyn AttestationService>,
    registry: ConsentRegistry,
    clients: Option<Clients>,
    clock: ClockMode,
    tap: Option<LiveTap>,
    stop: Option<Arc<AtomicBool>>,
}

impl Recorder {
    pub fn new(root: impl Into<PathBuf>, config: SessionConfig, scenario: ScenarioScript) -> Self {
        Recorder {
            root: root.into(),
            config,
            scenario,
            session_id: Uuid::new_v4(),
            service: Arc::new(LocalAttestationService::in_memory()),
            registry: ConsentRegistry::default(),
            clients: None,
            clock: ClockMode::default(),
            tap: None,
            stop: None,
        }
    }

    pub fn session_id(mut self, id: Uuid) -> Self {
        self.session_id = id;
        self
    }

    pub fn service(mut self, service: Arc<dyn AttestationService>) -> Self {
        self.service = service;
        self
    }

    pub fn registry(mut self, registry: ConsentRegistry) -> Self {
        self.registry = registry;
        self
    }

    pub fn clients(mut self, clients: Clients) -> Self {
        self.clients = Some(clients);
        self
    }

    pub fn clock(mut self, clock: ClockMode) -> Self {
        self.clock = clock;
        self
    }

    pub fn tap(mut self, tap: LiveTap) -> Self {
        self.tap = Some(tap);
        self
    }

    pub fn stop_flag(mut self, stop: Arc<AtomicBool>) -> Self {
        self.stop = Some(stop);
        self
    }

    /// Validates inputs, builds drivers and creates the session directory.
    pub fn start(self) -> Result<ActiveSession, RecordError> {
        let report = validate_config(&self.config);
        if !report.is_empty() {
            return Err(RecordError::Config(report));
        }
        let drivers = make_drivers(&self.config, &self.scenario)?;
        let writer = SessionWriter::create(
            &self.root,
            self.session_id,
            Utc::now(),
            self.config,
            self.service,
        )?;
        let live = writer.live();
        let dir = writer.dir().to_path_buf();
        let pipeline = Pipeline::new(
            writer,
            self.registry,
            self.clients.unwrap_or_else(Clients::mock),
            self.tap,
        );
        Ok(ActiveSession {
            dir,
            session_id: self.session_id,
            live,
            drivers,
            pipeline,
            duration_ms: self.scenario.duration_ms,
            clock: self.clock,
            stop: self.stop,
        })
    }

    pub fn run(self) -> Result<RecordOutcome, RecordError> {
        self.start()?.run()
    }
}

/// A created session whose drivers have not run yet.
pub struct ActiveSession {
    dir: PathBuf,
    session_id: Uuid,
    live: LiveHandle,
    drivers: Vec<Box<dyn SensorDriver>>,
    pipeline: Pipeline,
    duration_ms: u64,
    clock: ClockMode,
    stop: Option<Arc<AtomicBool>>,
}

impl ActiveSession {
    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn session_id(&self) -> Uuid {
        self.session_id
    }

    pub fn live(&self) -> LiveHandle {
        self.live.clone()
    }

    pub fn run(mut self) -> Result<RecordOutcome, RecordError> {
        let stop = self.stop.clone();
        let result = run_drivers(
            &mut self.drivers,
            self.duration_ms,
            self.clock,
            &mut self.pipeline,
            stop.as_deref(),
        );
        match result {
            Ok(run) => {
                let manifest = self.pipeline.finish(run.duration_ms)?;
                Ok(RecordOutcome {
                    dir: self.dir,
                    manifest,
                    run,
                })
            }
            Err(e) => {
                let manifest = self.pipeline.abort(e.partial.duration_ms);
                Err(RecordError::Aborted {
                    t_ms: e.t_ms,
                    reason: e.source.to_string(),
                    manifest: Box::new(manifest),
                    partial: e.partial,
                })
            }
        }
    }
}
