//! Recorder configuration snapshot.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stream::StreamId;

/// Seconds in the 16-hour recording day used for extrapolation.
pub const RECORDING_DAY_S: f64 = 16.0 * 3600.0;

/// Bytes per decimal gigabyte.
pub const GB: f64 = 1e9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    /// Pseudonymous wearer id. No real-name field exists anywhere.
    pub subject_id: String,
    pub eeg: RateSettings,
    pub image: RateSettings,
    pub gsr: RateSettings,
    /// Shared rate of the facial-expression and cognition streams.
    pub headset: RateSettings,
    pub audio: AudioSettings,
    pub band_power: BandPowerSettings,
    pub streams: BTreeMap<StreamId, StreamSettings>,
    pub rate_unit: RateUnit,
    pub rotation: RotationPolicy,
    pub des: DesPhrases,
    pub blur: BlurMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSettings {
    /// Samples per second.
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AudioSettings {
    pub chunk_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandPowerSettings {
    pub window_samples: usize,
    pub hop_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamSettings {
    pub enabled: bool,
    /// Target data rate, in `rate_unit` units per second.
    pub target_kb_per_s: f64,
}

/// How to read the `target_kb_per_s` figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateUnit {
    #[default]
    Kilobytes,
    Kilobits,
}

impl RateUnit {
    pub fn bytes_per_unit(self) -> f64 {
        match self {
            RateUnit::Kilobytes => 1000.0,
            RateUnit::Kilobits => 125.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationPolicy {
    /// Segment bytes plus the media bytes it references.
    pub max_bytes: u64,
    pub max_duration_ms: u64,
}

impl Default for RotationPolicy {
    fn default() -> Self {
        RotationPolicy {
            max_bytes: 16_000_000,
            max_duration_ms: 60_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesPhrases {
    pub start: String,
    pub end: String,
}

impl Default for DesPhrases {
    fn default() -> Self {
        DesPhrases {
            start: "start ziggy".into(),
            end: "end ziggy".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlurMode {
    /// 16-pixel mosaic cells filled with the cell mean.
    #[default]
    Pixelate,
    /// Solid black fill.
    Fill,
}

/// Accounting profile for data-volume extrapolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Full,
    /// Excludes images, audio, raw EEG and raw GSR.
    Text,
}

impl Profile {
    pub fn includes(self, stream: StreamId) -> bool {
        match self {
            Profile::Full => true,
            Profile::Text => !stream.is_raw(),
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Profile::Full),
            "text" => Ok(Profile::Text),
            other => Err(format!("unknown mode {other:?} (expected full|text)")),
        }
    }
}

impl Default for SessionConfig {
    fn default() -> Self {
        let streams = StreamId::ALL
            .into_iter()
            .map(|id| {
                (
                    id,
                    StreamSettings {
                        enabled: true,
                        target_kb_per_s: id.nominal_kb_per_s(),
                    },
                )
            })
            .collect();
        SessionConfig {
            subject_id: "subject-0001".into(),
            eeg: RateSettings { rate: 128.0 },
            image: RateSettings { rate: 1.0 },
            gsr: RateSettings { rate: 1.0 },
            headset: RateSettings { rate: 2.0 },
            audio: AudioSettings { chunk_ms: 10_000 },
            band_power: BandPowerSettings {
                window_samples: 256,
                hop_ms: 125,
            },
            streams,
            rate_unit: RateUnit::Kilobytes,
            rotation: RotationPolicy::default(),
            des: DesPhrases::default(),
            blur: BlurMode::Pixelate,
        }
    }
}

impl SessionConfig {
    pub fn stream(&self, id: StreamId) -> StreamSettings {
        self.streams.get(&id).copied().unwrap_or(StreamSettings {
            enabled: false,
            target_kb_per_s: 0.0,
        })
    }

    pub fn enabled(&self, id: StreamId) -> bool {
        self.stream(id).enabled
    }

    /// Target rate for one stream in bytes per second.
    pub fn target_bytes_per_s(&self, id: StreamId) -> f64 {
        let s = self.stream(id);
        if s.enabled {
            s.target_kb_per_s * self.rate_unit.bytes_per_unit()
        } else {
            0.0
        }
    }

    /// Sum of per-stream targets, in the configured unit per second.
    pub fn target_total_kb_per_s(&self, profile: Profile) -> f64 {
        StreamId::ALL
            .into_iter()
            .filter(|id| profile.includes(*id) && self.enabled(*id))
            .map(|id| self.stream(id).target_kb_per_s)
            .sum()
    }

    /// Daily volume implied by the configured targets, in decimal GB.
    pub fn nominal_daily_gb(&self, profile: Profile) -> f64 {
        let bytes_per_s: f64 = StreamId::ALL
            .into_iter()
            .filter(|id| profile.includes(*id))
            .map(|id| self.target_bytes_per_s(id))
            .sum();
        bytes_per_s * RECORDING_DAY_S / GB
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_reproduce_nominal_volume() {
        let cfg = SessionConfig::default();
        assert!((cfg.target_total_kb_per_s(Profile::Full) - 664.037).abs() < 1e-9);
        // 664.037 kB/s * 57_600 s = 38.2485 GB
        assert!((cfg.nominal_daily_gb(Profile::Full) - 38.248_531_2).abs() < 1e-6);
        // 14.027 kB/s * 57_600 s = 0.8080 GB
        assert!((cfg.nominal_daily_gb(Profile::Text) - 0.807_955_2).abs() < 1e-6);
    }

    #[test]
    fn kilobit_reading_is_eight_times_smaller() {
        let cfg = SessionConfig {
            rate_unit: RateUnit::Kilobits,
            ..SessionConfig::default()
        };
        assert!((cfg.nominal_daily_gb(Profile::Full) - 38.248_531_2 / 8.0).abs() < 1e-6);
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = SessionConfig::default();
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains(r#""eeg-raw":{"enabled":true"#));
        let back: SessionConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }
}
