//! Stepped-frequency radar returns from a scene of point scatterers.
//!
//! Each slow-time sample is one full sweep over `n_freq` frequency bins. After
//! mixing, bin `n` of a scatterer at two-way delay `t_d` carries the phase
//! `exp(-j2π(f0 + nΔf)·t_d)`; the rectangular envelope of the transmitted tone
//! is absorbed into the one-sample-per-bin model.

mod motion;

pub use motion::{body_scatterers, make_trajectory, MotionParams, MotionTemplate};

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Height of the antenna array above the floor in the default geometry (m).
pub const ARRAY_HEIGHT: f64 = 1.0;

pub type Point3 = [f64; 3];

pub(crate) fn distance(a: &Point3, b: &Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// SFCW sweep parameters and array geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// First frequency of the sweep (Hz).
    pub f_start: f64,
    /// Frequency step between bins (Hz).
    pub delta_f: f64,
    /// Number of frequency bins.
    pub n_freq: usize,
    /// Sweep (pulse) repetition frequency, i.e. the slow-time sample rate (Hz).
    pub prf: f64,
    /// Dwell time of one frequency step (s).
    pub modulation_period: f64,
    pub tx_positions: Vec<Point3>,
    pub rx_positions: Vec<Point3>,
}

impl Default for SweepConfig {
    /// 40 MHz to 4.4 GHz in 5 MHz steps at 113 Hz, with a six-element line
    /// array (0.4 m pitch) whose two outer elements transmit and four inner
    /// elements receive, giving eight channels.
    fn default() -> Self {
        let n_freq = 873;
        let prf = 113.0;
        let x = |i: usize| -1.0 + 0.4 * i as f64;
        Self {
            f_start: 40.0e6,
            delta_f: 5.0e6,
            n_freq,
            prf,
            modulation_period: 1.0 / (prf * n_freq as f64),
            tx_positions: vec![[x(0), 0.0, ARRAY_HEIGHT], [x(5), 0.0, ARRAY_HEIGHT]],
            rx_positions: (1..5).map(|i| [x(i), 0.0, ARRAY_HEIGHT]).collect(),
        }
    }
}

impl SweepConfig {
    /// Single co-located transmitter/receiver at `position`.
    pub fn monostatic(f_start: f64, delta_f: f64, n_freq: usize, prf: f64, position: Point3) -> Self {
        Self {
            f_start,
            delta_f,
            n_freq,
            prf,
            modulation_period: 1.0 / (prf * n_freq as f64),
            tx_positions: vec![position],
            rx_positions: vec![position],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_start.is_finite() && self.f_start >= 0.0) {
            return Err(Error::param("f_start", "must be finite and non-negative"));
        }
        if !(self.delta_f.is_finite() && self.delta_f > 0.0) {
            return Err(Error::param("delta_f", "must be positive"));
        }
        if self.n_freq < 2 {
            return Err(Error::param("n_freq", "need at least two frequency bins"));
        }
        if !(self.prf.is_finite() && self.prf > 0.0) {
            return Err(Error::param("prf", "must be positive"));
        }
        if !(self.modulation_period.is_finite() && self.modulation_period > 0.0) {
            return Err(Error::param("modulation_period", "must be positive"));
        }
        if self.tx_positions.is_empty() || self.rx_positions.is_empty() {
            return Err(Error::param("positions", "need at least one tx and one rx"));
        }
        if self
            .tx_positions
            .iter()
            .chain(&self.rx_positions)
            .flatten()
            .any(|v| !v.is_finite())
        {
            return Err(Error::param("positions", "antenna coordinates must be finite"));
        }
        Ok(())
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        self.f_start + bin as f64 * self.delta_f
    }

    /// Midpoint of the occupied band, `f0 + (N-1)Δf/2`.
    pub fn center_frequency(&self) -> f64 {
        self.f_start + 0.5 * (self.n_freq - 1) as f64 * self.delta_f
    }

    pub fn bandwidth(&self) -> f64 {
        self.n_freq as f64 * self.delta_f
    }

    /// Nominal range resolution `c / (2 N Δf)`.
    pub fn range_resolution(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.bandwidth())
    }

    /// Unambiguous range of the sweep, `c / (2 Δf)`.
    pub fn max_range(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.delta_f)
    }

    pub fn channel_count(&self) -> usize {
        self.tx_positions.len() * self.rx_positions.len()
    }

    /// Channels are numbered transmitter-major: `tx * n_rx + rx`.
    pub fn channel(&self, index: usize) -> Result<(Point3, Point3)> {
        let count = self.channel_count();
        if index >= count {
            return Err(Error::InvalidChannel { index, count });
        }
        let n_rx = self.rx_positions.len();
        Ok((self.tx_positions[index / n_rx], self.rx_positions[index % n_rx]))
    }
}

/// A point scatterer with one position per slow-time sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Scatterer {
    pub reflectivity: Complex64,
    pub trajectory: Vec<Point3>,
}

impl Scatterer {
    pub fn stationary(reflectivity: Complex64, position: Point3, n_slow: usize) -> Self {
        Self {
            reflectivity,
            trajectory: vec![position; n_slow],
        }
    }

    pub fn is_stationary(&self) -> bool {
        self.trajectory.windows(2).all(|w| w[0] == w[1])
    }
}

/// Homogeneous dielectric slab between the array and the scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallModel {
    pub thickness: f64,
    pub relative_permittivity: f64,
    pub two_way_loss_db: f64,
}

impl Default for WallModel {
    /// 30 cm slab, relative permittivity 6, 10 dB two-way loss.
    fn default() -> Self {
        Self {
            thickness: 0.30,
            relative_permittivity: 6.0,
            two_way_loss_db: 10.0,
        }
    }
}

impl WallModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.thickness.is_finite() && self.thickness >= 0.0) {
            return Err(Error::param("wall.thickness_m", "must be non-negative"));
        }
        if !(self.relative_permittivity.is_finite() && self.relative_permittivity >= 1.0) {
            return Err(Error::param("wall.eps_r", "must be at least 1"));
        }
        if !(self.two_way_loss_db.is_finite() && self.two_way_loss_db >= 0.0) {
            return Err(Error::param("wall.loss_db", "must be non-negative"));
        }
        Ok(())
    }

    /// Two-way excess delay of the slab relative to free space (s).
    pub fn excess_delay(&self) -> f64 {
        2.0 * self.thickness * (self.relative_permittivity.sqrt() - 1.0) / SPEED_OF_LIGHT
    }

    pub fn amplitude(&self) -> f64 {
        10f64.powf(-self.two_way_loss_db / 20.0)
    }
}

/// Complex transmission factor `A·exp(-j2πf·τ_extra)` of an optional wall.
pub fn wall_factor(wall: Option<&WallModel>, frequency: f64) -> Complex64 {
    match wall {
        None => Complex64::new(1.0, 0.0),
        Some(w) => Complex64::from_polar(w.amplitude(), -2.0 * PI * frequency * w.excess_delay()),
    }
}

/// Everything needed to synthesize the returns of one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionScene {
    pub scatterers: Vec<Scatterer>,
    pub wall: Option<WallModel>,
    /// Signal-to-noise ratio relative to the mean frame power (dB);
    /// `f64::INFINITY` disables noise.
    pub snr_db: f64,
    pub n_slow: usize,
    pub rng_seed: u64,
    /// RMS of a slow complex gain fluctuation applied to every sweep
    /// (fraction of unity). Zero keeps the receiver gain constant.
    pub gain_drift: f64,
}

impl MotionScene {
    pub fn new(n_slow: usize, rng_seed: u64) -> Self {
        Self {
            scatterers: Vec::new(),
            wall: None,
            snr_db: f64::INFINITY,
            n_slow,
            rng_seed,
            gain_drift: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_slow == 0 {
            return Err(Error::param("n_slow", "need at least one slow-time sample"));
        }
        if self.snr_db.is_nan() {
            return Err(Error::param("snr_db", "must not be NaN"));
        }
        if !(self.gain_drift.is_finite() && self.gain_drift >= 0.0) {
            return Err(Error::param("gain_drift", "must be finite and non-negative"));
        }
        if let Some(wall) = &self.wall {
            wall.validate()?;
        }
        for (i, s) in self.scatterers.iter().enumerate() {
            if s.trajectory.len() != self.n_slow {
                return Err(Error::DimensionMismatch(format!(
                    "scatterer {i} has {} positions, scene has {} slow-time samples",
                    s.trajectory.len(),
                    self.n_slow
                )));
            }
            if !(s.reflectivity.re.is_finite() && s.reflectivity.im.is_finite()) {
                return Err(Error::param("reflectivity", format!("scatterer {i} is not finite")));
            }
            if s.trajectory.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::param(
                    "trajectory",
                    format!("scatterer {i} has non-finite positions"),
                ));
            }
        }
        Ok(())
    }
}

/// Sampled mixer output: `n_freq` rows by `n_slow` columns for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyFrame {
    pub data: Array2<Complex64>,
    pub sweep: SweepConfig,
    pub channel_index: usize,
}

// Independent RNG streams derived from the scene seed.
const DRIFT_STREAM: u64 = 0;
const NOISE_STREAM_BASE: u64 = 1;

/// Synthesizes the frequency-domain returns of `scene` on one channel.
///
/// Entry `(n, t)` is `Σ a_d · W(f_n) · exp(-j2π f_n t_d(t))` with
/// `t_d = (|p_tx - p(t)| + |p(t) - p_rx|) / c`, followed by the optional gain
/// drift and circular complex Gaussian noise at `snr_db`.
pub fn synthesize(scene: &MotionScene, sweep: &SweepConfig, channel_index: usize) -> Result<FrequencyFrame> {
    sweep.validate()?;
    scene.validate()?;
    let (tx, rx) = sweep.channel(channel_index)?;

    let n_freq = sweep.n_freq;
    let n_slow = scene.n_slow;
    let mut data = Array2::<Complex64>::zeros((n_freq, n_slow));

    let freqs: Vec<f64> = (0..n_freq).map(|n| sweep.frequency(n)).collect();
    let walls: Vec<Complex64> = freqs.iter().map(|&f| wall_factor(scene.wall.as_ref(), f)).collect();

    for scatterer in &scene.scatterers {
        for (t, pos) in scatterer.trajectory.iter().enumerate() {
            let delay = (distance(&tx, pos) + distance(pos, &rx)) / SPEED_OF_LIGHT;
            for n in 0..n_freq {
                let cycles = freqs[n] * delay;
                let phase = -2.0 * PI * cycles.fract();
                data[[n, t]] += scatterer.reflectivity * walls[n] * Complex64::from_polar(1.0, phase);
            }
        }
    }

    if scene.gain_drift > 0.0 {
        let gain = gain_drift_profile(scene.gain_drift, n_slow, sweep.prf, scene.rng_seed);
        for (mut column, g) in data.columns_mut().into_iter().zip(gain) {
            column.mapv_inplace(|v| v * g);
        }
    }

    if scene.snr_db.is_finite() {
        let power = data.iter().map(|v| v.norm_sqr()).sum::<f64>() / data.len() as f64;
        if power > 0.0 {
            let sigma = (0.5 * power * 10f64.powf(-scene.snr_db / 10.0)).sqrt();
            let mut rng = ChaCha8Rng::seed_from_u64(scene.rng_seed);
            rng.set_stream(NOISE_STREAM_BASE + channel_index as u64);
            for v in data.iter_mut() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *v += Complex64::new(sigma * re, sigma * im);
            }
        }
    }

    Ok(FrequencyFrame {
        data,
        sweep: sweep.clone(),
        channel_index,
    })
}

/// Slowly varying receiver gain `1 + drift·w(t)`, where `w` is a sum of four
/// random complex tones between 0.2 and 1 Hz scaled to unit RMS over the
/// record. Shared by all channels of a scene (it depends only on the seed).
pub fn gain_drift_profile(drift: f64, n_slow: usize, prf: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(DRIFT_STREAM);
    let tones: Vec<(f64, f64)> = (0..4)
        .map(|_| (rng.random_range(0.2..1.0), rng.random_range(0.0..2.0 * PI)))
        .collect();
    let w: Vec<Complex64> = (0..n_slow)
        .map(|t| {
            let time = t as f64 / prf;
            tones
                .iter()
                .map(|&(f, phi)| Complex64::from_polar(1.0, 2.0 * PI * f * time + phi))
                .sum()
        })
        .collect();
    let rms = (w.iter().map(|v| v.norm_sqr()).sum::<f64>() / n_slow.max(1) as f64).sqrt();
    let scale = if rms > 0.0 { drift / rms } else { 0.0 };
    w.into_iter().map(|v| Complex64::new(1.0, 0.0) + v * scale).collect()
}
