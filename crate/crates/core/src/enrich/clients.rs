//! Analyzer service clients.
//!
//! Each service kind has a trait, a deterministic mock that reads scenario
//! ground truth from the capture sidecar, and a slot for a live adapter.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{Detection, Rect, Span, Speaker};
use crate::sim::{RawAudio, RawFrame};

use super::sentiment::Lexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ServiceKind {
    Transcribe,
    Sentiment,
    ImageText,
    ImageLabels,
    FaceDetect,
}

impl ServiceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ServiceKind::Transcribe => "transcribe",
            ServiceKind::Sentiment => "sentiment",
            ServiceKind::ImageText => "image-text",
            ServiceKind::ImageLabels => "image-labels",
            ServiceKind::FaceDetect => "face-detect",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClientError {
    #[error("{0} service unavailable: {1}")]
    Unavailable(&'static str, String),
    #[error("{0} request failed: {1}")]
    Failed(&'static str, String),
}

/// Which calls of a mock fail, counted from zero per client.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FailurePlan {
    #[serde(default)]
    pub fail_calls: BTreeSet<u64>,
    #[serde(default)]
    pub fail_all: bool,
}

impl FailurePlan {
    pub fn never() -> Self {
        Self::default()
    }

    pub fn always() -> Self {
        FailurePlan {
            fail_all: true,
            ..Self::default()
        }
    }

    pub fn on_calls(calls: impl IntoIterator<Item = u64>) -> Self {
        FailurePlan {
            fail_calls: calls.into_iter().collect(),
            fail_all: false,
        }
    }

    fn fails(&self, call: u64) -> bool {
        self.fail_all || self.fail_calls.contains(&call)
    }
}

#[derive(Debug, Default)]
struct CallCounter {
    plan: FailurePlan,
    next: u64,
}

impl CallCounter {
    fn new(plan: FailurePlan) -> Self {
        CallCounter { plan, next: 0 }
    }

    fn check(&mut self, kind: ServiceKind) -> Result<(), ClientError> {
        let call = self.next;
        self.next += 1;
        if self.plan.fails(call) {
            Err(ClientError::Failed(
                kind.as_str(),
                format!("injected failure on call {call}"),
            ))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub text: String,
    pub speaker: Speaker,
    pub span: Span,
}

pub trait Transcriber: Send {
    fn transcribe(&mut self, audio: &RawAudio) -> Result<Vec<Utterance>, ClientError>;
}

pub trait SentimentScorer: Send {
    /// Scores as `[positive, negative, mixed, neutral]`.
    fn score(&mut self, text: &str) -> Result<[f64; 4], ClientError>;
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameAnalysis {
    pub texts: Vec<Detection>,
    pub labels: Vec<Detection>,
}

pub trait ImageAnalyzer: Send {
    fn analyze(&mut self, frame: &RawFrame) -> Result<FrameAnalysis, ClientError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceDetection {
    pub bbox: Rect,
    /// Matcher token, when the detector recognised the face.
    pub signature: Option<String>,
}

/// Detector failure; `partial` holds any faces reported before it failed.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{error}")]
pub struct DetectError {
    pub error: ClientError,
    pub partial: Vec<FaceDetection>,
}

pub trait FaceDetector: Send {
    fn detect(&mut self, frame: &RawFrame) -> Result<Vec<FaceDetection>, DetectError>;
}

pub struct MockTranscriber(CallCounter);

impl MockTranscriber {
    pub fn new(plan: FailurePlan) -> Self {
        MockTranscriber(CallCounter::new(plan))
    }
}

impl Transcriber for MockTranscriber {
    fn transcribe(&mut self, audio: &RawAudio) -> Result<Vec<Utterance>, ClientError> {
        self.0.check(ServiceKind::Transcribe)?;
        Ok(audio
            .utterances
            .iter()
            .map(|u| Utterance {
                text: u.text.clone(),
                speaker: u.speaker,
                span: u.span,
            })
            .collect())
    }
}

pub struct MockSentiment {
    calls: CallCounter,
    lexicon: Lexicon,
}

impl MockSentiment {
    pub fn new(plan: FailurePlan) -> Self {
        MockSentiment {
            calls: CallCounter::new(plan),
            lexicon: Lexicon::builtin(),
        }
    }
}

impl SentimentScorer for MockSentiment {
    fn score(&mut self, text: &str) -> Result<[f64; 4], ClientError> {
        self.calls.check(ServiceKind::Sentiment)?;
        Ok(self.lexicon.score(text))
    }
}

pub struct MockImageAnalyzer(CallCounter);

impl MockImageAnalyzer {
    pub fn new(plan: FailurePlan) -> Self {
        MockImageAnalyzer(CallCounter::new(plan))
    }
}

impl ImageAnalyzer for MockImageAnalyzer {
    fn analyze(&mut self, frame: &RawFrame) -> Result<FrameAnalysis, ClientError> {
        self.0.check(ServiceKind::ImageLabels)?;
        let detect = |items: &[(String, Rect)]| {
            items
                .iter()
                .map(|(value, bbox)| Detection {
                    value: value.clone(),
                    confidence: 1.0,
                    bbox: *bbox,
                })
                .collect()
        };
        Ok(FrameAnalysis {
            texts: detect(&frame.truth.texts),
            labels: detect(&frame.truth.objects),
        })
    }
}

pub struct MockFaceDetector {
    calls: CallCounter,
    /// When a call fails, how many faces were reported before the failure.
    pub partial_before_failure: usize,
}

impl MockFaceDetector {
    pub fn new(plan: FailurePlan) -> Self {
        MockFaceDetector {
            calls: CallCounter::new(plan),
            partial_before_failure: 0,
        }
    }
}

impl FaceDetector for MockFaceDetector {
    fn detect(&mut self, frame: &RawFrame) -> Result<Vec<FaceDetection>, DetectError> {
        let all: Vec<FaceDetection> = frame
            .truth
            .faces
            .iter()
            .map(|f| FaceDetection {
                bbox: f.bbox,
                signature: Some(f.signature.clone()),
            })
            .collect();
        match self.calls.check(ServiceKind::FaceDetect) {
            Ok(()) => Ok(all),
            Err(error) => Err(DetectError {
                error,
                partial: all.into_iter().take(self.partial_before_failure).collect(),
            }),
        }
    }
}

/// Placeholder for a network-backed adapter. Every call reports the
/// service as unavailable until an implementation is plugged in.
#[derive(Debug, Clone, Default)]
pub struct LiveAdapter {
    pub endpoint: Option<String>,
}

impl LiveAdapter {
    fn unavailable(&self, kind: ServiceKind) -> ClientError {
        let why = match &self.endpoint {
            Some(e) => format!("no live adapter for {e}"),
            None => "no live adapter configured".to_string(),
        };
        ClientError::Unavailable(kind.as_str(), why)
    }
}

impl Transcriber for LiveAdapter {
    fn transcribe(&mut self, _audio: &RawAudio) -> Result<Vec<Utterance>, ClientError> {
        Err(self.unavailable(ServiceKind::Transcribe))
    }
}

impl SentimentScorer for LiveAdapter {
    fn score(&mut self, _text: &str) -> Result<[f64; 4], ClientError> {
        Err(self.unavailable(ServiceKind::Sentiment))
    }
}

impl ImageAnalyzer for LiveAdapter {
    fn analyze(&mut self, _frame: &RawFrame) -> Result<FrameAnalysis, ClientError> {
        Err(self.unavailable(ServiceKind::ImageLabels))
    }
}

impl FaceDetector for LiveAdapter {
    fn detect(&mut self, _frame: &RawFrame) -> Result<Vec<FaceDetection>, DetectError> {
        Err(DetectError {
            error: self.unavailable(ServiceKind::FaceDetect),
            partial: Vec::new(),
        })
    }
}

/// Failure plans for each mock client.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockFailures {
    #[serde(default)]
    pub transcribe: FailurePlan,
    #[serde(default)]
    pub sentiment: FailurePlan,
    #[serde(default)]
    pub image: FailurePlan,
    #[serde(default)]
    pub face_detect: FailurePlan,
}

/// The set of clients a pipeline uses.
pub struct Clients {
    pub transcriber: Box<dyn Transcriber>,
    pub sentiment: Box<dyn SentimentScorer>,
    pub image: Box<dyn ImageAnalyzer>,
    pub faces: Box<dyn FaceDetector>,
}

impl Clients {
    pub fn mock() -> Self {
        Self::mock_with(&MockFailures::default())
    }

    pub fn mock_with(f: &MockFailures) -> Self {
        Clients {
            transcriber: Box::new(MockTranscriber::new(f.transcribe.clone())),
            sentiment: Box::new(MockSentiment::new(f.sentiment.clone())),
            image: Box::new(MockImageAnalyzer::new(f.image.clone())),
            faces: Box::new(MockFaceDetector::new(f.face_detect.clone())),
        }
    }

    pub fn live(endpoint: Option<String>) -> Self {
        let a = LiveAdapter { endpoint };
        Clients {
            transcriber: Box::new(a.clone()),
            sentiment: Box::new(a.clone()),
            image: Box::new(a.clone()),
            faces: Box::new(a),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{FaceTruth, FrameTruth, Raster, UtteranceTruth};

    #[test]
    fn failure_plan_counts_calls() {
        let mut t = MockTranscriber::new(FailurePlan::on_calls([1]));
        let audio = RawAudio {
            bytes: vec![],
            utterances: vec![UtteranceTruth {
                text: "hello".into(),
                speaker: Speaker::Wearer,
                span: Span::new(0, 500),
            }],
        };
        assert_eq!(t.transcribe(&audio).unwrap().len(), 1);
        assert!(t.transcribe(&audio).is_err());
        assert!(t.transcribe(&audio).is_ok());
    }

    #[test]
    fn detector_reports_partial_on_failure() {
        let frame = RawFrame {
            pixels: Raster::filled(4, 4, [0, 0, 0]),
            truth: FrameTruth {
                faces: (0..3)
                    .map(|i| FaceTruth {
                        person_id: format!("p{i}"),
                        signature: format!("p{i}"),
                        bbox: Rect::new(i, 0, 1, 1),
                    })
                    .collect(),
                ..FrameTruth::default()
            },
        };
        let mut d = MockFaceDetector::new(FailurePlan::always());
        d.partial_before_failure = 2;
        let err = d.detect(&frame).unwrap_err();
        assert_eq!(err.partial.len(), 2);
    }

    #[test]
    fn live_adapter_is_unavailable() {
        let mut live = Clients::live(None);
        assert!(matches!(
            live.sentiment.score("hi"),
            Err(ClientError::Unavailable("sentiment", _))
        ));
    }
}
