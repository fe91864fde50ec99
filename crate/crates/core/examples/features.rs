//! The nine per-channel window features on a few hand-made signals.
//!
//! ```text
//! cargo run --example features
//! ```

use std::f64::consts::PI;

use seizure::features::{channel_features, detect_peaks_valleys, window_features, FEATURE_NAMES};

fn main() -> seizure::Result<()> {
    let w = 256;
    let slow: Vec<f64> = (0..w)
        .map(|i| 1.5 * (2.0 * PI * 4.0 * i as f64 / w as f64).sin())
        .collect();
    let fast: Vec<f64> = (0..w)
        .map(|i| 0.3 * (2.0 * PI * 23.0 * i as f64 / w as f64).sin() + 0.1 * (i as f64 * 1.7).cos())
        .collect();
    let flat = vec![0.0; w];

    let pv = detect_peaks_valleys(&[1.0, 3.0, 2.0, 2.0, 4.0, 1.0]);
    println!(
        "peaks {:?}, valleys {:?} in [1,3,2,2,4,1]\n",
        pv.peaks, pv.valleys
    );

    println!(
        "{:<24} {:>12} {:>12} {:>12}",
        "feature", "4 Hz", "23 Hz", "flat"
    );
    let rows = [&slow, &fast, &flat].map(|x| channel_features(x).to_array());
    for (f, name) in FEATURE_NAMES.iter().enumerate() {
        println!(
            "{name:<24} {:>12.4} {:>12.4} {:>12.4}",
            rows[0][f], rows[1][f], rows[2][f]
        );
    }

    let vector = window_features(&[slow, fast, flat])?;
    println!(
        "\nthree channels → {} features, channel-major",
        vector.len()
    );
    Ok(())
}
