use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The twelve recorded streams, in declaration order.
///
/// The derived `Ord` is the declaration order and doubles as the tie-break
/// when envelopes from different streams share a timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StreamId {
    EegRaw,
    AudioChunk,
    ImageFrame,
    Gsr,
    EegBandpower,
    FacialExpression,
    Cognition,
    AudioText,
    SpeechSentiment,
    DesReport,
    ImageText,
    ImageLabels,
}

impl StreamId {
    pub const ALL: [StreamId; 12] = [
        StreamId::EegRaw,
        StreamId::AudioChunk,
        StreamId::ImageFrame,
        StreamId::Gsr,
        StreamId::EegBandpower,
        StreamId::FacialExpression,
        StreamId::Cognition,
        StreamId::AudioText,
        StreamId::SpeechSentiment,
        StreamId::DesReport,
        StreamId::ImageText,
        StreamId::ImageLabels,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StreamId::EegRaw => "eeg-raw",
            StreamId::AudioChunk => "audio-chunk",
            StreamId::ImageFrame => "image-frame",
            StreamId::Gsr => "gsr",
            StreamId::EegBandpower => "eeg-bandpower",
            StreamId::FacialExpression => "facial-expression",
            StreamId::Cognition => "cognition",
            StreamId::AudioText => "audio-text",
            StreamId::SpeechSentiment => "speech-sentiment",
            StreamId::DesReport => "des-report",
            StreamId::ImageText => "image-text",
            StreamId::ImageLabels => "image-labels",
        }
    }

    /// Position in declaration order.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Nominal data rate in kilobytes per second for the reference rig.
    pub fn nominal_kb_per_s(self) -> f64 {
        match self {
            StreamId::EegRaw => 30.0,
            StreamId::AudioChunk => 20.0,
            StreamId::ImageFrame => 600.0,
            StreamId::Gsr => 0.01,
            StreamId::EegBandpower => 8.0,
            StreamId::FacialExpression => 4.0,
            StreamId::Cognition => 0.02,
            StreamId::AudioText => 0.003,
            StreamId::SpeechSentiment => 0.002,
            StreamId::DesReport => 0.001,
            StreamId::ImageText => 0.001,
            StreamId::ImageLabels => 2.0,
        }
    }

    /// Raw streams are dropped from the text-only accounting profile.
    pub fn is_raw(self) -> bool {
        matches!(
            self,
            StreamId::EegRaw | StreamId::AudioChunk | StreamId::ImageFrame | StreamId::Gsr
        )
    }

    /// Streams whose payload points at a sidecar media file.
    pub fn has_media(self) -> bool {
        matches!(self, StreamId::AudioChunk | StreamId::ImageFrame)
    }
}

impl fmt::Display for StreamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown stream id {0:?}")]
pub struct UnknownStream(pub String);

impl FromStr for StreamId {
    type Err = UnknownStream;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StreamId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| UnknownStream(s.to_string()))
    }
}

/// Parses a comma-separated stream list; an empty string selects every stream.
pub fn parse_stream_list(list: &str) -> Result<Vec<StreamId>, UnknownStream> {
    let list = list.trim();
    if list.is_empty() {
        return Ok(StreamId::ALL.to_vec());
    }
    list.split(',').map(|s| s.trim().parse()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_match_serde() {
        for id in StreamId::ALL {
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.as_str()));
            assert_eq!(id.as_str().parse::<StreamId>().unwrap(), id);
        }
    }

    #[test]
    fn nominal_rates_sum() {
        let total: f64 = StreamId::ALL.iter().map(|s| s.nominal_kb_per_s()).sum();
        assert!((total - 664.037).abs() < 1e-9);
        let text: f64 = StreamId::ALL
            .iter()
            .filter(|s| !s.is_raw())
            .map(|s| s.nominal_kb_per_s())
            .sum();
        assert!((text - 14.027).abs() < 1e-9);
    }

    #[test]
    fn stream_list_parsing() {
        assert_eq!(parse_stream_list("").unwrap().len(), 12);
        assert_eq!(
            parse_stream_list("gsr, cognition").unwrap(),
            vec![StreamId::Gsr, StreamId::Cognition]
        );
        assert!(parse_stream_list("gsr,bogus").is_err());
    }
}
