//! Payload types, one per stream.

use serde::{Deserialize, Serialize};

use super::digest::Digest32;
use super::stream::StreamId;

pub const EEG_CHANNELS: usize = 14;

/// Pixel rectangle, origin top-left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Rect { x, y, w, h }
    }

    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        self.w > 0 && self.h > 0 && self.right() <= width && self.bottom() <= height
    }
}

/// Closed time interval in session milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Span {
    pub start_ms: u64,
    pub end_ms: u64,
}

impl Span {
    pub fn new(start_ms: u64, end_ms: u64) -> Self {
        Span { start_ms, end_ms }
    }
}

/// Pointer to a content-addressed file under the session's `media/` directory.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediaRef {
    pub relative_path: String,
    pub content_hash: Digest32,
    pub byte_len: u64,
}

impl MediaRef {
    /// Canonical location: `media/<first two hex chars>/<hash>.<ext>`.
    pub fn for_content(bytes: &[u8], ext: &str) -> Self {
        let content_hash = Digest32::of(bytes);
        let hex = content_hash.to_hex();
        MediaRef {
            relative_path: format!("media/{}/{}.{}", &hex[..2], hex, ext),
            content_hash,
            byte_len: bytes.len() as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EegRaw {
    /// Microvolts, one entry per headset channel.
    pub channels: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gsr {
    pub conductance_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageFrame {
    pub media: MediaRef,
    pub width_px: u32,
    pub height_px: u32,
    /// Regions that were redacted before the frame was written.
    pub blurred_regions: Vec<Rect>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AudioChunk {
    pub media: MediaRef,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandPowers {
    pub theta: f64,
    pub alpha: f64,
    pub beta_l: f64,
    pub beta_h: f64,
    pub gamma: f64,
}

impl BandPowers {
    pub fn as_array(&self) -> [f64; 5] {
        [self.theta, self.alpha, self.beta_l, self.beta_h, self.gamma]
    }

    pub fn from_array(v: [f64; 5]) -> Self {
        BandPowers {
            theta: v[0],
            alpha: v[1],
            beta_l: v[2],
            beta_h: v[3],
            gamma: v[4],
        }
    }

    pub fn total(&self) -> f64 {
        self.as_array().iter().sum()
    }
}

pub const BAND_NAMES: [&str; 5] = ["theta", "alpha", "beta_l", "beta_h", "gamma"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandPower {
    pub per_channel: Vec<BandPowers>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EyeAction {
    #[default]
    Neutral,
    Blink,
    WinkLeft,
    WinkRight,
    LookLeft,
    LookRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpperFaceAction {
    #[default]
    Neutral,
    Surprise,
    Frown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LowerFaceAction {
    #[default]
    Neutral,
    Smile,
    Clench,
    SmirkLeft,
    SmirkRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceAction<A> {
    pub action: A,
    pub power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacialExpression {
    pub eye_action: EyeAction,
    pub upper_face: FaceAction<UpperFaceAction>,
    pub lower_face: FaceAction<LowerFaceAction>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cognition {
    pub engagement: f64,
    pub excitement: f64,
    pub stress: f64,
    pub relaxation: f64,
    pub interest: f64,
    pub focus: f64,
}

impl Cognition {
    pub const NEUTRAL: Cognition = Cognition {
        engagement: 0.5,
        excitement: 0.5,
        stress: 0.5,
        relaxation: 0.5,
        interest: 0.5,
        focus: 0.5,
    };

    pub fn named(&self) -> [(&'static str, f64); 6] {
        [
            ("engagement", self.engagement),
            ("excitement", self.excitement),
            ("stress", self.stress),
            ("relaxation", self.relaxation),
            ("interest", self.interest),
            ("focus", self.focus),
        ]
    }
}

impl Default for Cognition {
    fn default() -> Self {
        Cognition::NEUTRAL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Speaker {
    Wearer,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transcript {
    pub text: String,
    pub speaker: Speaker,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sentiment {
    pub positive: f64,
    pub negative: f64,
    pub mixed: f64,
    pub neutral: f64,
    pub ref_transcript_seq: u64,
}

impl Sentiment {
    pub fn sum(&self) -> f64 {
        self.positive + self.negative + self.mixed + self.neutral
    }

    pub fn argmax(&self) -> &'static str {
        let named = [
            ("positive", self.positive),
            ("negative", self.negative),
            ("mixed", self.mixed),
            ("neutral", self.neutral),
        ];
        named
            .iter()
            .fold(
                named[0],
                |best, &cur| if cur.1 > best.1 { cur } else { best },
            )
            .0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesReport {
    pub text: String,
    pub span: Span,
    /// False when the report was closed by the end of the session.
    pub terminated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detection {
    pub value: String,
    pub confidence: f64,
    #[serde(rename = "box")]
    pub bbox: Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detections {
    pub detections: Vec<Detection>,
    pub ref_frame_seq: u64,
}

/// A stream payload. The variant determines the envelope's stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Payload {
    EegRaw(EegRaw),
    AudioChunk(AudioChunk),
    ImageFrame(ImageFrame),
    Gsr(Gsr),
    EegBandpower(BandPower),
    FacialExpression(FacialExpression),
    Cognition(Cognition),
    AudioText(Transcript),
    SpeechSentiment(Sentiment),
    DesReport(DesReport),
    ImageText(Detections),
    ImageLabels(Detections),
}

impl Payload {
    pub fn stream(&self) -> StreamId {
        match self {
            Payload::EegRaw(_) => StreamId::EegRaw,
            Payload::AudioChunk(_) => StreamId::AudioChunk,
            Payload::ImageFrame(_) => StreamId::ImageFrame,
            Payload::Gsr(_) => StreamId::Gsr,
            Payload::EegBandpower(_) => StreamId::EegBandpower,
            Payload::FacialExpression(_) => StreamId::FacialExpression,
            Payload::Cognition(_) => StreamId::Cognition,
            Payload::AudioText(_) => StreamId::AudioText,
            Payload::SpeechSentiment(_) => StreamId::SpeechSentiment,
            Payload::DesReport(_) => StreamId::DesReport,
            Payload::ImageText(_) => StreamId::ImageText,
            Payload::ImageLabels(_) => StreamId::ImageLabels,
        }
    }

    /// Decodes a payload body for the given stream.
    pub fn from_value(stream: StreamId, value: serde_json::Value) -> serde_json::Result<Self> {
        use serde_json::from_value as de;
        Ok(match stream {
            StreamId::EegRaw => Payload::EegRaw(de(value)?),
            StreamId::AudioChunk => Payload::AudioChunk(de(value)?),
            StreamId::ImageFrame => Payload::ImageFrame(de(value)?),
            StreamId::Gsr => Payload::Gsr(de(value)?),
            StreamId::EegBandpower => Payload::EegBandpower(de(value)?),
            StreamId::FacialExpression => Payload::FacialExpression(de(value)?),
            StreamId::Cognition => Payload::Cognition(de(value)?),
            StreamId::AudioText => Payload::AudioText(de(value)?),
            StreamId::SpeechSentiment => Payload::SpeechSentiment(de(value)?),
            StreamId::DesReport => Payload::DesReport(de(value)?),
            StreamId::ImageText => Payload::ImageText(de(value)?),
            StreamId::ImageLabels => Payload::ImageLabels(de(value)?),
        })
    }

    pub fn media(&self) -> Option<&MediaRef> {
        match self {
            Payload::ImageFrame(f) => Some(&f.media),
            Payload::AudioChunk(c) => Some(&c.media),
            _ => None,
        }
    }

    /// Every floating-point field with its path relative to the payload.
    pub fn floats(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        match self {
            Payload::EegRaw(p) => {
                for (i, v) in p.channels.iter().enumerate() {
                    out.push((format!("channels[{i}]"), *v));
                }
            }
            Payload::Gsr(p) => out.push(("conductance_us".into(), p.conductance_us)),
            Payload::EegBandpower(p) => {
                for (i, ch) in p.per_channel.iter().enumerate() {
                    for (name, v) in BAND_NAMES.iter().zip(ch.as_array()) {
                        out.push((format!("per_channel[{i}].{name}"), v));
                    }
                }
            }
            Payload::FacialExpression(p) => {
                out.push(("upper_face.power".into(), p.upper_face.power));
                out.push(("lower_face.power".into(), p.lower_face.power));
            }
            Payload::Cognition(p) => {
                for (name, v) in p.named() {
                    out.push((name.to_string(), v));
                }
            }
            Payload::SpeechSentiment(p) => {
                out.push(("positive".into(), p.positive));
                out.push(("negative".into(), p.negative));
                out.push(("mixed".into(), p.mixed));
                out.push(("neutral".into(), p.neutral));
            }
            Payload::ImageText(p) | Payload::ImageLabels(p) => {
                for (i, d) in p.detections.iter().enumerate() {
                    out.push((format!("detections[{i}].confidence"), d.confidence));
                }
            }
            Payload::AudioChunk(_)
            | Payload::ImageFrame(_)
            | Payload::AudioText(_)
            | Payload::DesReport(_) => {}
        }
        out
    }
}
