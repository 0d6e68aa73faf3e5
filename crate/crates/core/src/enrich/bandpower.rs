//! EEG band power from a Hann-windowed periodogram.

use std::collections::VecDeque;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::model::{BandPower, BandPowers, EegRaw, Payload, SessionConfig, EEG_CHANNELS};

/// Half-open frequency bands in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandDefinition {
    pub edges: [(f64, f64); 5],
}

impl BandDefinition {
    pub const STANDARD: BandDefinition = BandDefinition {
        edges: [
            (4.0, 8.0),
            (8.0, 12.0),
            (12.0, 16.0),
            (16.0, 25.0),
            (25.0, 45.0),
        ],
    };

    /// Index of the band containing `freq_hz`, if any.
    pub fn band_of(&self, freq_hz: f64) -> Option<usize> {
        self.edges
            .iter()
            .position(|&(lo, hi)| freq_hz >= lo && freq_hz < hi)
    }

    pub fn is_valid(&self, nyquist_hz: f64) -> bool {
        self.edges[0].0 > 0.0
            && self.edges.windows(2).all(|w| w[0].1 == w[1].0)
            && self.edges.iter().all(|&(lo, hi)| lo < hi)
            && self.edges[4].1 < nyquist_hz
    }
}

impl Default for BandDefinition {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// Periodic Hann window of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect()
}

/// Reusable FFT plan for one window length.
pub struct Periodogram {
    n: usize,
    fs: f64,
    window: Vec<f64>,
    norm: f64,
    fft: Arc<dyn Fft<f64>>,
}

impl Periodogram {
    pub fn new(n: usize, fs: f64) -> Self {
        let window = hann(n);
        let sum_sq: f64 = window.iter().map(|w| w * w).sum();
        Periodogram {
            n,
            fs,
            norm: 1.0 / (fs * sum_sq),
            window,
            fft: FftPlanner::new().plan_fft_forward(n),
        }
    }

    pub fn bin_width(&self) -> f64 {
        self.fs / self.n as f64
    }

    /// One-sided PSD (units^2 / Hz) for bins `0..=n/2` of a mean-removed,
    /// windowed copy of `x`.
    pub fn psd(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "window length");
        let mean = x.iter().sum::<f64>() / self.n as f64;
        let mut buf: Vec<Complex<f64>> = x
            .iter()
            .zip(&self.window)
            .map(|(v, w)| Complex::new((v - mean) * w, 0.0))
            .collect();
        self.fft.process(&mut buf);
        let half = self.n / 2;
        (0..=half)
            .map(|k| {
                let p = buf[k].norm_sqr() * self.norm;
                // DC and Nyquist have no mirrored partner.
                if k == 0 || (self.n % 2 == 0 && k == half) {
                    p
                } else {
                    2.0 * p
                }
            })
            .collect()
    }

    /// Integrated power per band: sum of PSD bins whose centre frequency
    /// lies in the band, times the bin width.
    pub fn band_powers(&self, x: &[f64], bands: &BandDefinition) -> [f64; 5] {
        let df = self.bin_width();
        let mut out = [0.0; 5];
        for (k, p) in self.psd(x).into_iter().enumerate() {
            if let Some(b) = bands.band_of(k as f64 * df) {
                out[b] += p * df;
            }
        }
        out
    }
}

/// Band power for a `[sample][channel]` window sampled at `fs` Hz.
pub fn band_power(window: &[Vec<f64>], fs: f64, bands: &BandDefinition) -> BandPower {
    let plan = Periodogram::new(window.len(), fs);
    band_power_with(&plan, window, bands)
}

fn band_power_with(plan: &Periodogram, window: &[Vec<f64>], bands: &BandDefinition) -> BandPower {
    let channels = window.first().map_or(0, |s| s.len());
    let per_channel = (0..channels)
        .map(|ch| {
            let x: Vec<f64> = window.iter().map(|s| s[ch]).collect();
            BandPowers::from_array(plan.band_powers(&x, bands))
        })
        .collect();
    BandPower { per_channel }
}

/// Sliding-window band-power estimator over the raw EEG stream.
///
/// Emits one payload every `hop` samples once `window` samples have been
/// seen. Non-finite samples are dropped and counted.
pub struct BandPowerAnalyzer {
    plan: Periodogram,
    bands: BandDefinition,
    hop: usize,
    buffer: VecDeque<Vec<f64>>,
    since_emit: usize,
    rejected: u64,
}

impl BandPowerAnalyzer {
    pub fn new(config: &SessionConfig) -> Self {
        let n = config.band_power.window_samples;
        let hop =
            ((config.band_power.hop_ms as f64 * config.eeg.rate / 1000.0).round() as usize).max(1);
        BandPowerAnalyzer {
            plan: Periodogram::new(n, config.eeg.rate),
            bands: BandDefinition::STANDARD,
            hop,
            buffer: VecDeque::with_capacity(n),
            since_emit: 0,
            rejected: 0,
        }
    }

    pub fn hop_samples(&self) -> usize {
        self.hop
    }

    pub fn rejected(&self) -> u64 {
        self.rejected
    }

    pub fn push(&mut self, sample: &EegRaw) -> Option<Payload> {
        if sample.channels.len() != EEG_CHANNELS || sample.channels.iter().any(|v| !v.is_finite()) {
            self.rejected += 1;
            log::warn!(
                "band power: rejected malformed EEG sample ({} so far)",
                self.rejected
            );
            return None;
        }
        if self.buffer.len() == self.plan.n {
            self.buffer.pop_front();
        }
        self.buffer.push_back(sample.channels.clone());
        self.since_emit += 1;
        if self.buffer.len() < self.plan.n || self.since_emit < self.hop {
            return None;
        }
        self.since_emit = 0;
        let window: Vec<Vec<f64>> = self.buffer.iter().cloned().collect();
        Some(Payload::EegBandpower(band_power_with(
            &self.plan,
            &window,
            &self.bands,
        )))
    }
}
