//! Band-power estimates checked against a direct DFT written from scratch.

use std::f64::consts::PI;

use proptest::prelude::*;
use recorder_core::enrich::{band_power, hann, BandDefinition, BandPowerAnalyzer, Periodogram};
use recorder_core::model::{EegRaw, Payload, SessionConfig, StreamId, EEG_CHANNELS};
use recorder_core::sim::{EventKind, ScenarioScript};
use recorder_core::store::query;
use recorder_core::Recorder;

const FS: f64 = 128.0;
const N: usize = 256;
const EDGES: [(f64, f64); 5] = [
    (4.0, 8.0),
    (8.0, 12.0),
    (12.0, 16.0),
    (16.0, 25.0),
    (25.0, 45.0),
];

/// One-sided Hann-windowed periodogram by the O(N^2) definition, summed
/// over the bins whose centre frequency lies in each band.
fn oracle_bands(x: &[f64], fs: f64) -> [f64; 5] {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let w: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect();
    let s2: f64 = w.iter().map(|v| v * v).sum();
    let df = fs / n as f64;
    let mut out = [0.0; 5];
    for k in 0..=n / 2 {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, (&xi, &wi)) in x.iter().zip(&w).enumerate() {
            let phase = -2.0 * PI * (k * i) as f64 / n as f64;
            re += (xi - mean) * wi * phase.cos();
            im += (xi - mean) * wi * phase.sin();
        }
        let mut p = (re * re + im * im) / (fs * s2);
        if k != 0 && k != n / 2 {
            p *= 2.0;
        }
        let f = k as f64 * df;
        if let Some(b) = EDGES.iter().position(|&(lo, hi)| f >= lo && f < hi) {
            out[b] += p * df;
        }
    }
    out
}

fn tone(freq: f64, amp: f64, phase: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| amp * (2.0 * PI * freq * i as f64 / FS + phase).sin())
        .collect()
}

fn close(got: f64, want: f64, total: f64) -> bool {
    (got - want).abs() <= 0.05 * want + 1e-12 * total
}

#[test]
fn pure_tones_land_in_their_band_and_match_the_oracle() {
    let plan = Periodogram::new(N, FS);
    for (band, freq) in [6.0, 10.0, 14.0, 20.0, 35.0].into_iter().enumerate() {
        let x = tone(freq, 10.0, 0.3, N);
        let got = plan.band_powers(&x, &BandDefinition::STANDARD);
        let want = oracle_bands(&x, FS);
        let total: f64 = got.iter().sum();
        assert!(got[band] / total >= 0.95, "{freq} Hz: {got:?}");
        for b in 0..5 {
            assert!(
                close(got[b], want[b], total),
                "{freq} Hz band {b}: {} vs {}",
                got[b],
                want[b]
            );
        }
    }
}

#[test]
fn multichannel_window_keeps_channels_apart() {
    let freqs = [6.0, 10.0, 14.0, 20.0, 35.0];
    let columns: Vec<Vec<f64>> = (0..EEG_CHANNELS)
        .map(|c| tone(freqs[c % 5], 5.0 + c as f64, 0.1 * c as f64, N))
        .collect();
    let window: Vec<Vec<f64>> = (0..N)
        .map(|i| columns.iter().map(|col| col[i]).collect())
        .collect();
    let bp = band_power(&window, FS, &BandDefinition::STANDARD);
    assert_eq!(bp.per_channel.len(), EEG_CHANNELS);
    for (c, p) in bp.per_channel.iter().enumerate() {
        let got = p.as_array();
        let want = oracle_bands(&columns[c], FS);
        assert!(got[c % 5] / p.total() >= 0.95, "channel {c}");
        for b in 0..5 {
            assert!(close(got[b], want[b], p.total()), "channel {c} band {b}");
        }
    }
}

#[test]
fn two_tones_split_by_amplitude_squared() {
    let x: Vec<f64> = tone(6.0, 10.0, 0.0, N)
        .iter()
        .zip(tone(30.0, 5.0, 1.0, N))
        .map(|(a, b)| a + b)
        .collect();
    let got = Periodogram::new(N, FS).band_powers(&x, &BandDefinition::STANDARD);
    // Power of a sinusoid is A^2 / 2.
    assert!((got[0] - 50.0).abs() / 50.0 < 0.05, "{got:?}");
    assert!((got[4] - 12.5).abs() / 12.5 < 0.05, "{got:?}");
    let want = oracle_bands(&x, FS);
    for b in 0..5 {
        assert!(close(got[b], want[b], 62.5));
    }
}

#[test]
fn psd_integrates_to_windowed_energy() {
    let x: Vec<f64> = (0..N)
        .map(|i| ((i * 37 % 101) as f64 - 50.0) / 7.0)
        .collect();
    let plan = Periodogram::new(N, FS);
    let psd = plan.psd(&x);
    let mean = x.iter().sum::<f64>() / N as f64;
    let w = hann(N);
    let s2: f64 = w.iter().map(|v| v * v).sum();
    let energy: f64 = x
        .iter()
        .zip(&w)
        .map(|(v, wi)| ((v - mean) * wi).powi(2))
        .sum::<f64>()
        / s2;
    let integral: f64 = psd.iter().sum::<f64>() * plan.bin_width();
    assert!(
        (integral - energy).abs() / energy < 1e-9,
        "{integral} vs {energy}"
    );
}

proptest! {
    #[test]
    fn in_band_tones_dominate(band in 0usize..5, frac in 0.1f64..0.9, amp in 1.0f64..50.0, phase in 0.0f64..6.28) {
        let (lo, hi) = EDGES[band];
        // Keep two bins clear of the edges so Hann leakage stays inside.
        let df = FS / N as f64;
        let freq = lo + 2.0 * df + frac * (hi - lo - 4.0 * df);
        let x = tone(freq, amp, phase, N);
        let got = Periodogram::new(N, FS).band_powers(&x, &BandDefinition::STANDARD);
        let total: f64 = got.iter().sum();
        prop_assert!(got[band] / total >= 0.95, "{} Hz {:?}", freq, got);
        let want = oracle_bands(&x, FS);
        for b in 0..5 {
            prop_assert!(close(got[b], want[b], total));
        }
    }
}

#[test]
fn analyzer_emits_on_schedule() {
    let cfg = SessionConfig::default();
    let mut a = BandPowerAnalyzer::new(&cfg);
    assert_eq!(a.hop_samples(), 16);
    let mut emitted = Vec::new();
    for i in 0..1_280 {
        let s = EegRaw {
            channels: vec![(i as f64 * 0.1).sin(); EEG_CHANNELS],
        };
        if a.push(&s).is_some() {
            emitted.push(i);
        }
    }
    // First at the 256th sample, then every 16.
    assert_eq!(emitted.first(), Some(&255));
    assert!(emitted.windows(2).all(|w| w[1] - w[0] == 16));
    assert_eq!(emitted.len(), (1_280 - 256) / 16 + 1);
    assert!(a
        .push(&EegRaw {
            channels: vec![f64::NAN; EEG_CHANNELS]
        })
        .is_none());
    assert!(a
        .push(&EegRaw {
            channels: vec![0.0; 3]
        })
        .is_none());
    assert_eq!(a.rejected(), 2);
}

#[test]
fn recorded_tone_is_alpha_dominated() {
    let tmp = tempfile::tempdir().unwrap();
    let mut scenario = ScenarioScript::new(4, 10_000);
    scenario.eeg_noise_uv = 0.5;
    scenario.push(
        1_000,
        EventKind::EegTone {
            freq_hz: 10.0,
            channels: vec![0, 5],
            span_ms: 8_000,
            amplitude_uv: 20.0,
        },
    );
    let mut cfg = SessionConfig::default();
    cfg.streams.get_mut(&StreamId::ImageFrame).unwrap().enabled = false;
    let out = Recorder::new(tmp.path(), cfg, scenario).run().unwrap();
    let bp = query(&out.dir, &[StreamId::EegBandpower], 3_000, 9_000).unwrap();
    assert!(!bp.is_empty());
    for env in bp {
        let Payload::EegBandpower(p) = env.payload else {
            unreachable!()
        };
        for ch in [0, 5] {
            let c = &p.per_channel[ch];
            assert!(c.alpha / c.total() >= 0.95, "t={} ch={ch} {c:?}", env.t_ms);
        }
    }
}
