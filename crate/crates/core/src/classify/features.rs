use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::range_map::RangeMap;
use crate::tfr::Spectrogram;

/// Default feature-map size (rows, cols).
pub const DEFAULT_DIMS: (usize, usize) = (64, 64);

/// Dynamic range kept when spectrograms are converted to dB.
pub const DB_FLOOR: f64 = 40.0;

/// The four inputs a classifier can be trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureKind {
    /// Mean-subtracted range map.
    MsRm,
    /// RPCA sparse range map.
    RpcaRm,
    /// Spectrogram of the mean-subtracted map.
    MsSpec,
    /// Spectrogram of the RPCA sparse map.
    RpcaSpec,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 4] = [
        FeatureKind::MsRm,
        FeatureKind::RpcaRm,
        FeatureKind::MsSpec,
        FeatureKind::RpcaSpec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::MsRm => "ms_rm",
            FeatureKind::RpcaRm => "rpca_rm",
            FeatureKind::MsSpec => "ms_spec",
            FeatureKind::RpcaSpec => "rpca_spec",
        }
    }

    pub fn is_spectrogram(self) -> bool {
        matches!(self, FeatureKind::MsSpec | FeatureKind::RpcaSpec)
    }

    pub fn uses_rpca(self) -> bool {
        matches!(self, FeatureKind::RpcaRm | FeatureKind::RpcaSpec)
    }

    /// 16 components for range maps, 5 for spectrograms.
    pub fn default_components(self) -> usize {
        if self.is_spectrogram() {
            5
        } else {
            16
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown feature kind `{s}`")))
    }
}

/// Nonnegative, max-normalized matrix ready for 2D-PCA.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub data: Array2<f64>,
    pub kind: FeatureKind,
    pub label: usize,
    /// Set when the input carried no energy; `data` is then all zero.
    pub all_zero: bool,
}

impl FeatureMap {
    pub fn dims(&self) -> (usize, usize) {
        self.data.dim()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum FeatureSource<'a> {
    RangeMap(&'a RangeMap),
    Spectrogram(&'a Spectrogram),
}

/// Bilinear resampling with pixel-centre alignment.
///
/// Output pixel `i` samples the input at `(i + 0.5)·in/out − 0.5`, clamped to
/// the valid index range.
pub fn bilinear_resize(input: &Array2<f64>, rows: usize, cols: usize) -> Result<Array2<f64>> {
    let (h, w) = input.dim();
    if h == 0 || w == 0 {
        return Err(Error::param("input", "empty matrix"));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::param("target_dims", "must be nonzero"));
    }
    if (h, w) == (rows, cols) {
        return Ok(input.clone());
    }
    let taps = |out: usize, len: usize| -> Vec<(usize, usize, f64)> {
        (0..out)
            .map(|i| {
                let src = ((i as f64 + 0.5) * len as f64 / out as f64 - 0.5).clamp(0.0, (len - 1) as f64);
                let lo = src.floor() as usize;
                let hi = (lo + 1).min(len - 1);
                (lo, hi, src - lo as f64)
            })
            .collect()
    };
    let row_taps = taps(rows, h);
    let col_taps = taps(cols, w);
    Ok(Array2::from_shape_fn((rows, cols), |(i, j)| {
        let (r0, r1, fr) = row_taps[i];
        let (c0, c1, fc) = col_taps[j];
        let top = input[[r0, c0]] * (1.0 - fc) + input[[r0, c1]] * fc;
        let bottom = input[[r1, c0]] * (1.0 - fc) + input[[r1, c1]] * fc;
        top * (1.0 - fr) + bottom * fr
    }))
}

/// Turns a range map (magnitude) or spectrogram (dB above a 40 dB floor)
/// into a `dims`-sized map scaled to a maximum of one.
///
/// An input without energy yields an all-zero map with `all_zero` set.
pub fn prepare_feature_map(
    input: FeatureSource<'_>,
    kind: FeatureKind,
    dims: (usize, usize),
    label: usize,
) -> Result<FeatureMap> {
    let raw = match input {
        FeatureSource::RangeMap(map) => {
            if kind.is_spectrogram() {
                return Err(Error::param("kind", format!("{kind} expects a spectrogram")));
            }
            map.data.mapv(|v| v.norm())
        }
        FeatureSource::Spectrogram(spec) => {
            if !kind.is_spectrogram() {
                return Err(Error::param("kind", format!("{kind} expects a range map")));
            }
            let peak = spec.data.iter().cloned().fold(0.0, f64::max);
            if peak > 0.0 {
                spec.data.mapv(|p| {
                    if p > 0.0 {
                        (10.0 * (p / peak).log10()).max(-DB_FLOOR) + DB_FLOOR
                    } else {
                        0.0
                    }
                })
            } else {
                spec.data.clone()
            }
        }
    };
    if raw.is_empty() {
        return Err(Error::param("input", "empty matrix"));
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("input", "contains non-finite values"));
    }
    let mut data = bilinear_resize(&raw, dims.0, dims.1)?;
    let peak = data.iter().cloned().fold(0.0, f64::max);
    let all_zero = peak <= 0.0;
    if all_zero {
        data.fill(0.0);
    } else {
        data.mapv_inplace(|v| v / peak);
    }
    Ok(FeatureMap {
        data,
        kind,
        label,
        all_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn range_map(data: Array2<f64>) -> RangeMap {
        RangeMap::new(data.mapv(|v| Complex64::new(v, -v)), 0.03, 113.0)
    }

    #[test]
    fn kind_names_round_trip() {
        for k in FeatureKind::ALL {
            assert_eq!(k.name().parse::<FeatureKind>().unwrap(), k);
        }
        assert!("rm".parse::<FeatureKind>().is_err());
        assert_eq!(FeatureKind::RpcaRm.default_components(), 16);
        assert_eq!(FeatureKind::MsSpec.default_components(), 5);
    }

    #[test]
    fn constant_map_becomes_ones() {
        let map = range_map(Array2::from_elem((8, 8), 3.0));
        let f = prepare_feature_map(FeatureSource::RangeMap(&map), FeatureKind::MsRm, (8, 8), 2).unwrap();
        assert!(f.data.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert!(!f.all_zero);
        assert_eq!(f.label, 2);
    }

    #[test]
    fn checkerboard_averages_to_uniform() {
        let board = Array2::from_shape_fn((4, 4), |(i, j)| ((i + j) % 2) as f64);
        let out = bilinear_resize(&board, 2, 2).unwrap();
        assert!(out.iter().all(|&v| (v - 0.5).abs() < 1e-15), "{out:?}");
    }

    #[test]
    fn upsampling_interpolates_linearly() {
        let ramp = Array2::from_shape_fn((1, 2), |(_, j)| j as f64);
        let out = bilinear_resize(&ramp, 1, 4).unwrap();
        // sample positions -0.25, 0.25, 0.75, 1.25 clamp to [0, 1]
        let expected = [0.0, 0.25, 0.75, 1.0];
        for (a, b) in out.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn scaling_input_leaves_output_unchanged() {
        let data = Array2::from_shape_fn((10, 7), |(i, j)| ((i * 3 + j * 5) % 11) as f64 + 0.5);
        let a = prepare_feature_map(
            FeatureSource::RangeMap(&range_map(data.clone())),
            FeatureKind::RpcaRm,
            (6, 6),
            0,
        )
        .unwrap();
        let b = prepare_feature_map(
            FeatureSource::RangeMap(&range_map(data * 37.5)),
            FeatureKind::RpcaRm,
            (6, 6),
            0,
        )
        .unwrap();
        for (x, y) in a.data.iter().zip(b.data.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((a.data.iter().cloned().fold(0.0, f64::max) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_input_is_flagged() {
        let map = range_map(Array2::zeros((5, 5)));
        let f = prepare_feature_map(FeatureSource::RangeMap(&map), FeatureKind::MsRm, (4, 4), 0).unwrap();
        assert!(f.all_zero);
        assert!(f.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn spectrogram_uses_db_floor() {
        let mut data = Array2::from_elem((4, 4), 1e-9);
        data[[1, 2]] = 1.0;
        data[[0, 0]] = 0.01;
        let spec = Spectrogram {
            data,
            frequencies: vec![-2.0, -1.0, 0.0, 1.0],
            times: vec![0.0, 1.0, 2.0, 3.0],
            prf: 4.0,
        };
        let f = prepare_feature_map(FeatureSource::Spectrogram(&spec), FeatureKind::MsSpec, (4, 4), 0).unwrap();
        assert_eq!(f.data[[1, 2]], 1.0);
        // -20 dB sits halfway through the 40 dB range, -90 dB is clipped
        assert!((f.data[[0, 0]] - 0.5).abs() < 1e-12);
        assert_eq!(f.data[[3, 3]], 0.0);
    }

    #[test]
    fn mismatched_kind_is_rejected() {
        let map = range_map(Array2::ones((3, 3)));
        assert!(prepare_feature_map(FeatureSource::RangeMap(&map), FeatureKind::RpcaSpec, (3, 3), 0).is_err());
    }
}
