//! Band powers of a synthetic 14-channel window, one tone per band.
//!
//! cargo run -p recorder-core --example band_power -- [freq_hz]

use std::f64::consts::PI;

use recorder_core::enrich::{band_power, BandDefinition};
use recorder_core::model::EEG_CHANNELS;

const FS: f64 = 128.0;
const WINDOW: usize = 256;

fn main() {
    let extra: Option<f64> = std::env::args().nth(1).and_then(|s| s.parse().ok());
    let tones = [6.0, 10.0, 14.0, 20.0, 35.0];
    let freq = |c: usize| extra.unwrap_or(tones[c % tones.len()]);
    let window: Vec<Vec<f64>> = (0..WINDOW)
        .map(|i| {
            (0..EEG_CHANNELS)
                .map(|c| 10.0 * (2.0 * PI * freq(c) * i as f64 / FS).sin())
                .collect()
        })
        .collect();
    let bp = band_power(&window, FS, &BandDefinition::STANDARD);
    println!(
        "{:>3} {:>6} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "ch", "Hz", "theta", "alpha", "beta_l", "beta_h", "gamma"
    );
    for (c, p) in bp.per_channel.iter().enumerate() {
        let [t, a, bl, bh, g] = p.as_array();
        println!(
            "{c:>3} {:>6.1} {t:>10.3} {a:>10.3} {bl:>10.3} {bh:>10.3} {g:>10.3}",
            freq(c)
        );
    }
}
