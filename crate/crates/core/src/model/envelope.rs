use std::cmp::Ordering;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::payload::Payload;
use super::stream::StreamId;

/// One timestamped datum on one stream.
///
/// The stream is carried by the payload variant, so an envelope whose stream
/// disagrees with its payload cannot be constructed or decoded.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleEnvelope {
    /// Session-relative milliseconds.
    pub t_ms: u64,
    pub seq_in_stream: u64,
    pub payload: Payload,
}

impl SampleEnvelope {
    pub fn new(t_ms: u64, seq_in_stream: u64, payload: Payload) -> Self {
        SampleEnvelope {
            t_ms,
            seq_in_stream,
            payload,
        }
    }

    pub fn stream(&self) -> StreamId {
        self.payload.stream()
    }

    /// Merge key: time, then stream declaration order, then sequence.
    pub fn order_key(&self) -> (u64, StreamId, u64) {
        (self.t_ms, self.stream(), self.seq_in_stream)
    }

    pub fn cmp_order(&self, other: &Self) -> Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

#[derive(Serialize)]
struct EnvelopeOut<'a> {
    payload: &'a Payload,
    seq_in_stream: u64,
    stream: StreamId,
    t_ms: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvelopeIn {
    payload: serde_json::Value,
    seq_in_stream: u64,
    stream: StreamId,
    t_ms: u64,
}

impl Serialize for SampleEnvelope {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        EnvelopeOut {
            payload: &self.payload,
            seq_in_stream: self.seq_in_stream,
            stream: self.stream(),
            t_ms: self.t_ms,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SampleEnvelope {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = EnvelopeIn::deserialize(deserializer)?;
        let payload = Payload::from_value(raw.stream, raw.payload).map_err(|e| {
            serde::de::Error::custom(format!("payload for stream {}: {e}", raw.stream))
        })?;
        Ok(SampleEnvelope {
            t_ms: raw.t_ms,
            seq_in_stream: raw.seq_in_stream,
            payload,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::payload::{Cognition, Detections, Gsr};

    #[test]
    fn stream_follows_payload() {
        let env = SampleEnvelope::new(
            5,
            0,
            Payload::Gsr(Gsr {
                conductance_us: 4.0,
            }),
        );
        let json = serde_json::to_string(&env).unwrap();
        assert_eq!(
            json,
            r#"{"payload":{"conductance_us":4.0},"seq_in_stream":0,"stream":"gsr","t_ms":5}"#
        );
        let back: SampleEnvelope = serde_json::from_str(&json).unwrap();
        assert_eq!(back, env);
    }

    #[test]
    fn mismatched_stream_is_rejected() {
        let json =
            r#"{"payload":{"conductance_us":4.0},"seq_in_stream":0,"stream":"cognition","t_ms":5}"#;
        assert!(serde_json::from_str::<SampleEnvelope>(json).is_err());
    }

    #[test]
    fn identical_shapes_keep_their_stream() {
        let d = Detections {
            detections: vec![],
            ref_frame_seq: 3,
        };
        for payload in [Payload::ImageText(d.clone()), Payload::ImageLabels(d)] {
            let env = SampleEnvelope::new(0, 0, payload);
            let back: SampleEnvelope =
                serde_json::from_str(&serde_json::to_string(&env).unwrap()).unwrap();
            assert_eq!(back.stream(), env.stream());
        }
    }

    #[test]
    fn order_key_breaks_ties_by_stream() {
        let a = SampleEnvelope::new(
            10,
            7,
            Payload::Gsr(Gsr {
                conductance_us: 1.0,
            }),
        );
        let b = SampleEnvelope::new(10, 0, Payload::Cognition(Cognition::NEUTRAL));
        assert_eq!(a.cmp_order(&b), Ordering::Less);
    }
}
