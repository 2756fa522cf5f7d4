//! Micro-Doppler spectrograms from range maps.
//!
//! A contiguous block of range bins (the gate) is collapsed into one
//! slow-time signal, either by coherent summation or by picking the strongest
//! bin per sample, and the result is transformed with a sliding-window FFT.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::range_map::RangeMap;

/// Inclusive interval of range bins `[first, last]` (rows of the map).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RangeGate {
    pub first: usize,
    pub last: usize,
}

impl RangeGate {
    pub fn new(first: usize, last: usize) -> Self {
        Self { first, last }
    }

    pub fn width(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn contains(&self, bin: usize) -> bool {
        (self.first..=self.last).contains(&bin)
    }

    fn check(&self, rows: usize) -> Result<()> {
        if self.first > self.last || self.last >= rows {
            return Err(Error::param(
                "gate",
                format!("[{}, {}] outside map with {rows} bins", self.first, self.last),
            ));
        }
        Ok(())
    }
}

/// Energy of every range bin integrated over slow time.
pub fn bin_energy(map: &RangeMap) -> Vec<f64> {
    map.data
        .rows()
        .into_iter()
        .map(|row| row.iter().map(|v| v.norm_sqr()).sum())
        .collect()
}

/// Smallest contiguous gate that contains the peak-energy bin and at least
/// `energy_fraction` of the slow-time-integrated energy.
///
/// Among gates of equal width the one holding more energy wins, then the one
/// starting lower.
pub fn select_range_gate(map: &RangeMap, energy_fraction: f64) -> Result<RangeGate> {
    if !(energy_fraction > 0.0 && energy_fraction <= 1.0) {
        return Err(Error::param("energy_fraction", "must lie in (0, 1]"));
    }
    if map.rows() == 0 || map.cols() == 0 {
        return Err(Error::Degenerate("empty range map".into()));
    }
    let energy = bin_energy(map);
    let total: f64 = energy.iter().sum();
    if total <= 0.0 {
        return Err(Error::Degenerate("range map has no energy".into()));
    }
    let peak = energy
        .iter()
        .enumerate()
        .fold(0, |best, (i, &e)| if e > energy[best] { i } else { best });

    let mut prefix = Vec::with_capacity(energy.len() + 1);
    prefix.push(0.0);
    for e in &energy {
        prefix.push(prefix.last().unwrap() + e);
    }
    // rounding in the prefix sums must not make f = 1 unreachable
    let target = energy_fraction * total * (1.0 - 1e-12);

    let mut best: Option<(usize, f64, RangeGate)> = None;
    for first in 0..=peak {
        // smallest last >= peak reaching the target; prefix is monotone
        let base = prefix[first];
        let mut lo = peak;
        let mut hi = energy.len() - 1;
        if prefix[hi + 1] - base < target {
            continue;
        }
        while lo < hi {
            let mid = (lo + hi) / 2;
            if prefix[mid + 1] - base >= target {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let gate = RangeGate::new(first, lo);
        let held = prefix[lo + 1] - base;
        let better = match &best {
            None => true,
            Some((w, e, _)) => gate.width() < *w || (gate.width() == *w && held > *e),
        };
        if better {
            best = Some((gate.width(), held, gate));
        }
    }
    best.map(|(_, _, g)| g)
        .ok_or_else(|| Error::Degenerate("no gate reaches the energy fraction".into()))
}

/// Coherent sum of the gated bins for every slow-time sample.
pub fn range_stack(map: &RangeMap, gate: RangeGate) -> Result<Vec<Complex64>> {
    gate.check(map.rows())?;
    Ok((0..map.cols())
        .map(|t| (gate.first..=gate.last).map(|m| map.data[[m, t]]).sum())
        .collect())
}

/// For every slow-time sample, the gated value of largest modulus (ties go
/// to the lower bin).
///
/// This is a magnitude-max stand-in for range-max time-frequency processing,
/// not a reproduction of any particular published variant.
pub fn range_max_stack(map: &RangeMap, gate: RangeGate) -> Result<Vec<Complex64>> {
    gate.check(map.rows())?;
    Ok((0..map.cols())
        .map(|t| {
            let mut best = map.data[[gate.first, t]];
            for m in gate.first + 1..=gate.last {
                let v = map.data[[m, t]];
                if v.norm() > best.norm() {
                    best = v;
                }
            }
            best
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowKind {
    /// `0.5(1 − cos(2πn/(L+1)))`, n = 1..L (no zero end points).
    #[default]
    Hanning,
    Hamming,
    Rectangular,
}

impl WindowKind {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            WindowKind::Hanning => (1..=len)
                .map(|n| 0.5 * (1.0 - (2.0 * PI * n as f64 / (len + 1) as f64).cos()))
                .collect(),
            WindowKind::Hamming => {
                if len == 1 {
                    return vec![1.0];
                }
                (0..len)
                    .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / (len - 1) as f64).cos())
                    .collect()
            }
            WindowKind::Rectangular => vec![1.0; len],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WindowKind::Hanning => "hanning",
            WindowKind::Hamming => "hamming",
            WindowKind::Rectangular => "rectangular",
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hanning" | "hann" => Ok(WindowKind::Hanning),
            "hamming" => Ok(WindowKind::Hamming),
            "rectangular" | "rect" | "boxcar" => Ok(WindowKind::Rectangular),
            other => Err(Error::Config(format!("unknown window `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftParams {
    pub window_len: usize,
    pub overlap: usize,
    pub fft_size: usize,
    pub window_kind: WindowKind,
}

impl Default for StftParams {
    /// 32-sample Hanning window, 31 samples of overlap, 128-point FFT.
    fn default() -> Self {
        Self {
            window_len: 32,
            overlap: 31,
            fft_size: 128,
            window_kind: WindowKind::Hanning,
        }
    }
}

impl StftParams {
    pub fn hop(&self) -> usize {
        self.window_len - self.overlap
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_len == 0 {
            return Err(Error::param("stft.window", "must be at least 1"));
        }
        if self.overlap >= self.window_len {
            return Err(Error::param("stft.overlap", "must be smaller than the window"));
        }
        if self.fft_size < self.window_len {
            return Err(Error::param("stft.fft_size", "must be at least the window length"));
        }
        Ok(())
    }
}

/// Power spectrogram: `fft_size` Doppler rows (row 0 at `-prf/2`) by frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub data: Array2<f64>,
    /// Doppler frequency of every row (Hz), ascending over `[-prf/2, prf/2)`.
    pub frequencies: Vec<f64>,
    /// Centre time of every frame (s).
    pub times: Vec<f64>,
    pub prf: f64,
}

impl Spectrogram {
    /// Row holding zero Doppler.
    pub fn zero_row(&self) -> usize {
        self.frequencies.len() / 2
    }

    /// Row whose frequency is closest to `hz`.
    pub fn row_of(&self, hz: f64) -> usize {
        let k = self.frequencies.len() as f64;
        let bin = (hz / self.prf * k).round() as i64 + (self.frequencies.len() / 2) as i64;
        bin.clamp(0, self.frequencies.len() as i64 - 1) as usize
    }
}

/// Short-time Fourier power spectrum of a slow-time signal.
///
/// Only full windows are used; frame `i` covers samples
/// `i·hop .. i·hop + window_len`.
pub fn spectrogram(signal: &[Complex64], params: &StftParams, prf: f64) -> Result<Spectrogram> {
    params.validate()?;
    if !(prf.is_finite() && prf > 0.0) {
        return Err(Error::param("prf", "must be positive"));
    }
    let len = params.window_len;
    if signal.len() < len {
        return Err(Error::param(
            "signal",
            format!("{} samples is shorter than the {len}-sample window", signal.len()),
        ));
    }
    let k = params.fft_size;
    let hop = params.hop();
    let frames = (signal.len() - len) / hop + 1;
    let window = params.window_kind.coefficients(len);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(k);

    let mut data = Array2::<f64>::zeros((k, frames));
    let mut buffer = vec![Complex64::new(0.0, 0.0); k];
    let half = k / 2;
    for frame in 0..frames {
        let start = frame * hop;
        buffer.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (i, w) in window.iter().enumerate() {
            buffer[i] = signal[start + i] * *w;
        }
        fft.process(&mut buffer);
        for (bin, v) in buffer.iter().enumerate() {
            // shift so that row 0 is -prf/2
            let row = (bin + half) % k;
            data[[row, frame]] = v.norm_sqr();
        }
    }

    let frequencies = (0..k).map(|r| (r as f64 - half as f64) * prf / k as f64).collect();
    let times = (0..frames)
        .map(|f| (f * hop) as f64 / prf + 0.5 * (len - 1) as f64 / prf)
        .collect();
    Ok(Spectrogram {
        data,
        frequencies,
        times,
        prf,
    })
}
