//! Range/slow-time maps formed by an inverse DFT over the frequency axis.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal_model::{FrequencyFrame, SPEED_OF_LIGHT};

/// Complex range map: `rows` range bins by `cols` slow-time samples.
///
/// `start_bin` is nonzero only for maps cropped to a range window; row `m`
/// then sits at range `(start_bin + m) * bin_spacing`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeMap {
    pub data: Array2<Complex64>,
    pub bin_spacing: f64,
    pub prf: f64,
    pub start_bin: usize,
}

/// Where the phase of each range bin is referenced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseReference {
    /// Plain inverse DFT of the sweep; phases refer to the first frequency.
    #[default]
    StartFrequency,
    /// Bin `m` is additionally rotated by `exp(-j2π·m·(N-1)/(2M))`, which
    /// refers the phase of every bin to the band centre. Magnitudes are
    /// unchanged, and summing bins around a target then yields a slow-time
    /// signal whose Doppler follows the centre frequency.
    BandCenter,
}

impl RangeMap {
    pub fn new(data: Array2<Complex64>, bin_spacing: f64, prf: f64) -> Self {
        Self {
            data,
            bin_spacing,
            prf,
            start_bin: 0,
        }
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn with_data(&self, data: Array2<Complex64>) -> Self {
        Self {
            data,
            bin_spacing: self.bin_spacing,
            prf: self.prf,
            start_bin: self.start_bin,
        }
    }

    /// Range of row `row` (m).
    pub fn range_of(&self, row: usize) -> f64 {
        (self.start_bin + row) as f64 * self.bin_spacing
    }

    /// Keeps `len` rows starting at `first` (relative to this map).
    pub fn crop_rows(&self, first: usize, len: usize) -> Result<Self> {
        if len == 0 || first + len > self.rows() {
            return Err(Error::param(
                "range window",
                format!("rows {first}..{} outside 0..{}", first + len, self.rows()),
            ));
        }
        Ok(Self {
            data: self.data.slice(ndarray::s![first..first + len, ..]).to_owned(),
            bin_spacing: self.bin_spacing,
            prf: self.prf,
            start_bin: self.start_bin + first,
        })
    }

    /// Keeps the rows whose range lies in `[min_m, max_m)`.
    pub fn crop_range(&self, min_m: f64, max_m: f64) -> Result<Self> {
        if !(min_m.is_finite() && max_m.is_finite() && min_m >= 0.0 && max_m > min_m) {
            return Err(Error::param("range window", "need 0 <= min < max"));
        }
        let first = ((min_m / self.bin_spacing - 1e-9).ceil() as usize).saturating_sub(self.start_bin);
        let end = (((max_m / self.bin_spacing - 1e-9).ceil() as usize).saturating_sub(self.start_bin)).min(self.rows());
        if end <= first {
            return Err(Error::param("range window", "window does not overlap the map"));
        }
        self.crop_rows(first, end - first)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// IDFT length for `n_freq` bins: the smallest power of two strictly
/// greater than `n_freq`.
pub fn idft_size(n_freq: usize) -> usize {
    (n_freq + 1).next_power_of_two()
}

/// Range-bin spacing `c / (2 M Δf)` of an `m`-point IDFT.
pub fn bin_spacing(m: usize, delta_f: f64) -> f64 {
    SPEED_OF_LIGHT / (2.0 * m as f64 * delta_f)
}

/// Inverse DFT (1/M normalization) of every zero-padded slow-time column.
pub fn form_range_map(frame: &FrequencyFrame) -> Result<RangeMap> {
    form_range_map_with(frame, PhaseReference::StartFrequency)
}

pub fn form_range_map_with(frame: &FrequencyFrame, reference: PhaseReference) -> Result<RangeMap> {
    let (n_freq, n_slow) = frame.data.dim();
    if n_freq == 0 || n_slow == 0 {
        return Err(Error::Degenerate("empty frequency frame".into()));
    }
    if n_freq != frame.sweep.n_freq {
        return Err(Error::DimensionMismatch(format!(
            "frame has {n_freq} frequency rows, sweep declares {}",
            frame.sweep.n_freq
        )));
    }
    frame.sweep.validate()?;

    let m = idft_size(n_freq);
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(m);
    let scale = 1.0 / m as f64;
    let rotation: Option<Vec<Complex64>> = match reference {
        PhaseReference::StartFrequency => None,
        PhaseReference::BandCenter => {
            let center = 0.5 * (n_freq - 1) as f64;
            Some(
                (0..m)
                    .map(|bin| Complex64::from_polar(1.0, -2.0 * PI * center * bin as f64 / m as f64))
                    .collect(),
            )
        }
    };

    let mut data = Array2::<Complex64>::zeros((m, n_slow));
    let mut buffer = vec![Complex64::new(0.0, 0.0); m];
    for (t, column) in frame.data.axis_iter(Axis(1)).enumerate() {
        buffer.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (b, v) in buffer.iter_mut().zip(column.iter()) {
            *b = *v;
        }
        ifft.process(&mut buffer);
        for (row, v) in buffer.iter().enumerate() {
            let mut value = v * scale;
            if let Some(rot) = &rotation {
                value *= rot[row];
            }
            data[[row, t]] = value;
        }
    }

    Ok(RangeMap::new(
        data,
        bin_spacing(m, frame.sweep.delta_f),
        frame.sweep.prf,
    ))
}

/// Range of every row (m).
pub fn range_axis(map: &RangeMap) -> Vec<f64> {
    (0..map.rows()).map(|m| map.range_of(m)).collect()
}

/// Removes the slow-time mean of every range bin.
pub fn mean_subtract(map: &RangeMap) -> Result<RangeMap> {
    if map.cols() < 2 {
        return Err(Error::Degenerate(
            "mean subtraction needs at least two slow-time samples".into(),
        ));
    }
    let mut data = map.data.clone();
    for mut row in data.rows_mut() {
        let mean = row.sum() / row.len() as f64;
        row.mapv_inplace(|v| v - mean);
    }
    Ok(map.with_data(data))
}
