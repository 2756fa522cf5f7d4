//! Scene construction, per-sample processing and the synthetic labelled
//! benchmark used for classification.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classify::{prepare_feature_map, FeatureKind, FeatureMap, FeatureSource, LabeledDataset, DEFAULT_DIMS};
use crate::error::{Error, Result};
use crate::range_map::{form_range_map_with, mean_subtract, PhaseReference, RangeMap};
use crate::rpca::{rpca_decompose, RpcaParams, RpcaResult};
use crate::signal_model::{
    body_scatterers, synthesize, MotionParams, MotionScene, MotionTemplate, Scatterer, SweepConfig, WallModel,
};
use crate::tfr::{range_max_stack, range_stack, select_range_gate, spectrogram, Spectrogram, StftParams};

const CLUTTER_STREAM: u64 = 7;

/// Static point clutter scattered over a box in front of the array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClutterSpec {
    pub count: usize,
    /// Total clutter power over total body power, `10·log10(Σ|a_c|²/Σ|a_b|²)`.
    pub csr_db: f64,
    pub min_range: f64,
    pub max_range: f64,
}

impl Default for ClutterSpec {
    fn default() -> Self {
        Self {
            count: 0,
            csr_db: 0.0,
            min_range: 1.5,
            max_range: 4.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub template: MotionTemplate,
    pub params: MotionParams,
    pub n_slow: usize,
    pub seed: u64,
    pub snr_db: f64,
    pub wall: Option<WallModel>,
    pub gain_drift: f64,
    pub clutter: ClutterSpec,
}

impl SceneSpec {
    pub fn new(template: MotionTemplate, n_slow: usize, seed: u64) -> Self {
        Self {
            template,
            params: MotionParams::defaults(template),
            n_slow,
            seed,
            snr_db: f64::INFINITY,
            wall: None,
            gain_drift: 0.0,
            clutter: ClutterSpec::default(),
        }
    }
}

/// Random static scatterers; magnitudes are rescaled so their summed power
/// is `csr_db` above `body_power` (or left in `[0.5, 1]` when the body
/// carries no power).
pub fn clutter_scatterers(spec: &ClutterSpec, body_power: f64, n_slow: usize, seed: u64) -> Result<Vec<Scatterer>> {
    if !(spec.min_range > 0.0 && spec.max_range > spec.min_range) {
        return Err(Error::param("clutter range", "need 0 < min < max"));
    }
    if !spec.csr_db.is_finite() {
        return Err(Error::param("clutter.csr_db", "must be finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(CLUTTER_STREAM);
    let mut out: Vec<Scatterer> = (0..spec.count)
        .map(|_| {
            let pos = [
                rng.random_range(-1.5..1.5),
                rng.random_range(spec.min_range..spec.max_range),
                rng.random_range(0.0..2.2),
            ];
            let a = Complex64::from_polar(rng.random_range(0.5..1.0), rng.random_range(0.0..2.0 * PI));
            Scatterer::stationary(a, pos, n_slow)
        })
        .collect();
    let power: f64 = out.iter().map(|s| s.reflectivity.norm_sqr()).sum();
    if body_power > 0.0 && power > 0.0 {
        let scale = (body_power * 10f64.powf(spec.csr_db / 10.0) / power).sqrt();
        for s in &mut out {
            s.reflectivity *= scale;
        }
    }
    Ok(out)
}

pub fn build_scene(spec: &SceneSpec, prf: f64) -> Result<MotionScene> {
    let body = body_scatterers(spec.template, &spec.params, spec.n_slow, prf, spec.seed)?;
    let body_power: f64 = body.iter().map(|s| s.reflectivity.norm_sqr()).sum();
    let clutter = clutter_scatterers(&spec.clutter, body_power, spec.n_slow, spec.seed)?;
    let mut scene = MotionScene::new(spec.n_slow, spec.seed);
    scene.scatterers = body;
    scene.scatterers.extend(clutter);
    scene.wall = spec.wall;
    scene.snr_db = spec.snr_db;
    scene.gain_drift = spec.gain_drift;
    scene.validate()?;
    Ok(scene)
}

/// How a synthesized sweep becomes filtered maps, spectrograms and features.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessingParams {
    pub channel: usize,
    pub phase_reference: PhaseReference,
    /// `[min, max)` in metres; `None` keeps every bin.
    pub range_window: Option<(f64, f64)>,
    pub rpca: RpcaParams,
    pub gate_fraction: f64,
    pub stft: StftParams,
    pub use_range_max: bool,
    pub feature_dims: (usize, usize),
}

impl Default for ProcessingParams {
    fn default() -> Self {
        Self {
            channel: 0,
            phase_reference: PhaseReference::BandCenter,
            range_window: Some((1.5, 5.25)),
            rpca: RpcaParams::default(),
            gate_fraction: 0.9,
            stft: StftParams::default(),
            use_range_max: false,
            feature_dims: DEFAULT_DIMS,
        }
    }
}

/// Range map of one scene on the configured channel, cropped to the window.
pub fn simulate_range_map(scene: &MotionScene, sweep: &SweepConfig, params: &ProcessingParams) -> Result<RangeMap> {
    let frame = synthesize(scene, sweep, params.channel)?;
    let map = form_range_map_with(&frame, params.phase_reference)?;
    match params.range_window {
        Some((lo, hi)) => map.crop_range(lo, hi),
        None => Ok(map),
    }
}

/// Sparse part of the RPCA split as a range map, plus solver diagnostics.
pub fn rpca_filter(map: &RangeMap, params: &RpcaParams) -> Result<(RangeMap, RpcaResult)> {
    let result = rpca_decompose(&map.data, params)?;
    Ok((map.with_data(result.sparse.clone()), result))
}

/// Gate, stack and transform a filtered range map.
pub fn map_spectrogram(map: &RangeMap, params: &ProcessingParams) -> Result<Spectrogram> {
    let gate = select_range_gate(map, params.gate_fraction)?;
    let signal = if params.use_range_max {
        range_max_stack(map, gate)?
    } else {
        range_stack(map, gate)?
    };
    spectrogram(&signal, &params.stft, map.prf)
}

/// Both filtered versions of a raw range map.
#[derive(Debug, Clone)]
pub struct FilteredMaps {
    pub mean_sub: RangeMap,
    pub rpca: RangeMap,
    pub rpca_result: RpcaResult,
}

pub fn filter_both(raw: &RangeMap, params: &ProcessingParams) -> Result<FilteredMaps> {
    let mean_sub = mean_subtract(raw)?;
    let (rpca, rpca_result) = rpca_filter(raw, &params.rpca)?;
    Ok(FilteredMaps {
        mean_sub,
        rpca,
        rpca_result,
    })
}

/// Feature map of one kind from already filtered maps.
pub fn feature_for(
    filtered: &FilteredMaps,
    kind: FeatureKind,
    params: &ProcessingParams,
    label: usize,
) -> Result<FeatureMap> {
    let map = if kind.uses_rpca() {
        &filtered.rpca
    } else {
        &filtered.mean_sub
    };
    if kind.is_spectrogram() {
        let spec = map_spectrogram(map, params)?;
        prepare_feature_map(FeatureSource::Spectrogram(&spec), kind, params.feature_dims, label)
    } else {
        prepare_feature_map(FeatureSource::RangeMap(map), kind, params.feature_dims, label)
    }
}

/// Kinematic parameters drawn around the template defaults; the start
/// position moves by up to `position_jitter` metres across and along range.
pub fn randomized_params(template: MotionTemplate, position_jitter: f64, rng: &mut ChaCha8Rng) -> MotionParams {
    let mut p = MotionParams::defaults(template);
    let mut jitter = |v: f64, rel: f64| v * rng.random_range(1.0 - rel..1.0 + rel);
    p.speed = jitter(p.speed, 0.2);
    p.drop = jitter(p.drop, 0.15);
    p.duration = jitter(p.duration, 0.15);
    p.cadence = jitter(p.cadence, 0.15);
    p.limb_amplitude = jitter(p.limb_amplitude, 0.2);
    p.origin[0] += position_jitter * rng.random_range(-1.0..1.0);
    p.origin[1] += position_jitter * rng.random_range(-1.0..1.0);
    p.onset = rng.random_range(0.05..0.3);
    p
}

/// Synthetic benchmark: a fixed set of classes, randomized kinematics per
/// sample, static clutter, noise and receiver gain drift.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    pub classes: Vec<MotionTemplate>,
    pub samples_per_class: usize,
    pub n_slow: usize,
    /// Half-width of the start-position spread (m).
    pub position_jitter: f64,
    pub snr_db: f64,
    pub gain_drift: f64,
    pub wall: Option<WallModel>,
    pub clutter: ClutterSpec,
    pub seed: u64,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        Self {
            classes: MotionTemplate::DAILY.to_vec(),
            samples_per_class: 40,
            n_slow: 128,
            position_jitter: 0.1,
            snr_db: 30.0,
            gain_drift: 0.05,
            wall: Some(WallModel::default()),
            clutter: ClutterSpec {
                count: 8,
                csr_db: 30.0,
                ..ClutterSpec::default()
            },
            seed: 2024,
        }
    }
}

/// splitmix64 step; decorrelates per-sample seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl BenchmarkSpec {
    pub fn class_names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.name().to_string()).collect()
    }

    /// Scene of sample `index` of class `class`.
    pub fn scene_spec(&self, class: usize, index: usize) -> SceneSpec {
        let seed = mix_seed(self.seed, (class * 1_000_003 + index) as u64);
        let template = self.classes[class];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SceneSpec {
            template,
            params: randomized_params(template, self.position_jitter, &mut rng),
            n_slow: self.n_slow,
            seed,
            snr_db: self.snr_db,
            wall: self.wall,
            gain_drift: self.gain_drift,
            clutter: self.clutter,
        }
    }
}

/// One labelled dataset per requested feature kind.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub datasets: Vec<(FeatureKind, LabeledDataset)>,
    /// Samples whose RPCA split hit the iteration cap.
    pub unconverged: usize,
}

impl Benchmark {
    pub fn dataset(&self, kind: FeatureKind) -> Option<&LabeledDataset> {
        self.datasets.iter().find(|(k, _)| *k == kind).map(|(_, d)| d)
    }
}

pub fn generate_benchmark(
    spec: &BenchmarkSpec,
    sweep: &SweepConfig,
    params: &ProcessingParams,
    kinds: &[FeatureKind],
) -> Result<Benchmark> {
    if spec.classes.is_empty() || spec.samples_per_class < 2 {
        return Err(Error::param("dataset", "need classes with at least two samples each"));
    }
    let mut samples: Vec<Vec<FeatureMap>> = vec![Vec::new(); kinds.len()];
    let mut unconverged = 0;
    for class in 0..spec.classes.len() {
        for index in 0..spec.samples_per_class {
            let scene = build_scene(&spec.scene_spec(class, index), sweep.prf)?;
            let raw = simulate_range_map(&scene, sweep, params)?;
            let filtered = filter_both(&raw, params)?;
            if !filtered.rpca_result.converged {
                unconverged += 1;
            }
            for (slot, &kind) in samples.iter_mut().zip(kinds) {
                slot.push(feature_for(&filtered, kind, params, class)?);
            }
        }
    }
    let names = spec.class_names();
    let datasets = kinds
        .iter()
        .zip(samples)
        .map(|(&k, s)| Ok((k, LabeledDataset::new(s, names.clone())?)))
        .collect::<Result<_>>()?;
    Ok(Benchmark { datasets, unconverged })
}
