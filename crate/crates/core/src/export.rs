//! Text and image renderings of range maps, spectrograms and confusion
//! matrices. Every function returns bytes; callers decide where they go.

use std::fmt::Write as _;

use ndarray::Array2;

use crate::classify::ConfusionMatrix;
use crate::range_map::RangeMap;
use crate::tfr::Spectrogram;

/// Default dynamic range of graymap images.
pub const DEFAULT_FLOOR_DB: f64 = 40.0;

/// Magnitudes, one line per range bin; first column is the range in metres.
pub fn range_map_csv(map: &RangeMap) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# range map magnitude; rows={} cols={} bin_spacing_m={} prf_hz={} start_bin={}",
        map.rows(),
        map.cols(),
        map.bin_spacing,
        map.prf,
        map.start_bin
    );
    out.push_str("range_m");
    for t in 0..map.cols() {
        let _ = write!(out, ",{}", t as f64 / map.prf);
    }
    out.push('\n');
    for (m, row) in map.data.rows().into_iter().enumerate() {
        let _ = write!(out, "{}", map.range_of(m));
        for v in row {
            let _ = write!(out, ",{}", v.norm());
        }
        out.push('\n');
    }
    out
}

/// Power values, one line per Doppler bin (ascending frequency); the header
/// row holds the frame times.
pub fn spectrogram_csv(spec: &Spectrogram) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# spectrogram power; doppler_bins={} frames={} prf_hz={} doppler_min_hz={} doppler_step_hz={}",
        spec.frequencies.len(),
        spec.times.len(),
        spec.prf,
        spec.frequencies.first().copied().unwrap_or(0.0),
        spec.prf / spec.frequencies.len().max(1) as f64
    );
    out.push_str("doppler_hz\\time_s");
    for t in &spec.times {
        let _ = write!(out, ",{t}");
    }
    out.push('\n');
    for (f, row) in spec.frequencies.iter().zip(spec.data.rows()) {
        let _ = write!(out, "{f}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// 8-bit binary graymap of a power matrix in dB relative to its peak;
/// `floor_db` below the peak maps to black. With `flip` the last row is
/// drawn at the top.
pub fn power_pgm(power: &Array2<f64>, floor_db: f64, flip: bool) -> Vec<u8> {
    let (h, w) = power.dim();
    let peak = power.iter().cloned().fold(0.0, f64::max);
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    for r in 0..h {
        let row = if flip { h - 1 - r } else { r };
        for c in 0..w {
            let p = power[[row, c]];
            let level = if peak > 0.0 && p > 0.0 {
                let db = 10.0 * (p / peak).log10();
                ((db + floor_db) / floor_db).clamp(0.0, 1.0)
            } else {
                0.0
            };
            out.push((level * 255.0).round() as u8);
        }
    }
    out
}

/// Spectrogram image with positive Doppler at the top.
pub fn spectrogram_pgm(spec: &Spectrogram, floor_db: f64) -> Vec<u8> {
    power_pgm(&spec.data, floor_db, true)
}

/// Range map image with the nearest bin at the bottom.
pub fn range_map_pgm(map: &RangeMap, floor_db: f64) -> Vec<u8> {
    power_pgm(&map.data.mapv(|v| v.norm_sqr()), floor_db, true)
}

/// Aligned table of two-decimal fractions.
pub fn confusion_text(cm: &ConfusionMatrix) -> String {
    let width = cm.class_names.iter().map(|n| n.len()).max().unwrap_or(0).max(4);
    let mut out = String::new();
    let _ = write!(out, "{:<width$}", "true\\pred");
    for name in &cm.class_names {
        let _ = write!(out, " {name:>width$}");
    }
    out.push('\n');
    for (r, name) in cm.class_names.iter().enumerate() {
        let _ = write!(out, "{name:<width$}");
        for c in 0..cm.class_names.len() {
            let _ = write!(out, " {:>width$.2}", cm.fractions[[r, c]]);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "accuracy {:.4}", cm.accuracy());
    out
}

pub fn confusion_csv(cm: &ConfusionMatrix) -> String {
    let mut out = String::from("true\\pred");
    for name in &cm.class_names {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    for (r, name) in cm.class_names.iter().enumerate() {
        out.push_str(name);
        for c in 0..cm.class_names.len() {
            let _ = write!(out, ",{}", cm.fractions[[r, c]]);
        }
        out.push('\n');
    }
    out
}
