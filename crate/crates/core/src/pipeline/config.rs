//! `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Keys are validated against a
//! fixed table; values that do not parse produce [`Error::Config`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::classify::FeatureKind;
use crate::dataset::{BenchmarkSpec, ClutterSpec, ProcessingParams, SceneSpec};
use crate::error::{Error, Result};
use crate::range_map::PhaseReference;
use crate::rpca::RpcaParams;
use crate::signal_model::{MotionParams, MotionTemplate, SweepConfig, WallModel};
use crate::tfr::{StftParams, WindowKind};

pub const KNOWN_KEYS: &[&str] = &[
    "f_start_hz",
    "delta_f_hz",
    "n_freq",
    "prf_hz",
    "channel",
    "phase_reference",
    "wall",
    "wall.thickness_m",
    "wall.eps_r",
    "wall.loss_db",
    "snr_db",
    "n_slow",
    "seed",
    "gain_drift",
    "motion.template",
    "motion.origin_x",
    "motion.origin_y",
    "motion.origin_z",
    "motion.speed",
    "motion.drop",
    "motion.duration",
    "motion.onset",
    "motion.cadence",
    "motion.limb_amplitude",
    "clutter.count",
    "clutter.csr_db",
    "clutter.min_range_m",
    "clutter.max_range_m",
    "range.min_m",
    "range.max_m",
    "filter",
    "rpca.lambda",
    "rpca.mu0",
    "rpca.rho",
    "rpca.mu_max_factor",
    "rpca.tol",
    "rpca.max_iter",
    "gate.energy_fraction",
    "stack",
    "stft.window",
    "stft.overlap",
    "stft.fft_size",
    "stft.taper",
    "feature",
    "feature.rows",
    "feature.cols",
    "classify.components",
    "classify.k",
    "classify.train_frac",
    "classify.seeds",
    "dataset.classes",
    "dataset.samples_per_class",
    "dataset.position_jitter_m",
    "image.floor_db",
    "out",
];

/// Clutter filter applied by `filter`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMethod {
    None,
    MeanSub,
    Rpca,
}

impl FilterMethod {
    pub fn name(self) -> &'static str {
        match self {
            FilterMethod::None => "none",
            FilterMethod::MeanSub => "mean_sub",
            FilterMethod::Rpca => "rpca",
        }
    }
}

impl fmt::Display for FilterMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(FilterMethod::None),
            "mean_sub" => Ok(FilterMethod::MeanSub),
            "rpca" => Ok(FilterMethod::Rpca),
            other => Err(Error::Config(format!("unknown filter method `{other}`"))),
        }
    }
}

/// Raw key/value pairs, sorted by key.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigEntries(pub BTreeMap<String, String>);

impl ConfigEntries {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(i) => &line[..i],
                None => line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Config(format!("line {}: unknown key `{key}`", no + 1)));
            }
            if map.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", no + 1)));
            }
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read `{}`: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets `key`, replacing any value from the file.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        self.0.insert(key.to_string(), value.into());
        Ok(())
    }

    /// Canonical `key = value` lines, sorted.
    pub fn canonical(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// SHA-256 of the canonical form without the output directory, in hex.
    pub fn sha256(&self) -> String {
        let mut content = self.clone();
        content.0.remove("out");
        hex(&Sha256::digest(content.canonical().as_bytes()))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`"))),
        }
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Floats; `inf` and `-inf` are accepted.
    fn float_or(&self, key: &str, default: f64) -> Result<f64> {
        let v: f64 = self.get_or(key, default)?;
        if v.is_nan() {
            return Err(Error::Config(format!("`{key}` is NaN")));
        }
        Ok(v)
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.0.get(key).map(String::as_str) {
            None => Ok(default),
            Some("true" | "yes" | "on" | "1") => Ok(true),
            Some("false" | "no" | "off" | "none" | "0") => Ok(false),
            Some(other) => Err(Error::Config(format!("`{key}`: expected a boolean, got `{other}`"))),
        }
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Fully resolved settings for every command.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub entries: ConfigEntries,
    pub sweep: SweepConfig,
    pub scene: SceneSpec,
    pub processing: ProcessingParams,
    pub filter: FilterMethod,
    pub feature: Option<FeatureKind>,
    pub components: Option<usize>,
    pub k: usize,
    pub train_frac: f64,
    pub eval_seeds: usize,
    pub benchmark: BenchmarkSpec,
    pub floor_db: f64,
    pub out_dir: PathBuf,
}

impl PipelineConfig {
    pub fn from_entries(entries: ConfigEntries) -> Result<Self> {
        let e = &entries;
        let mut sweep = SweepConfig::default();
        sweep.f_start = e.float_or("f_start_hz", sweep.f_start)?;
        sweep.delta_f = e.float_or("delta_f_hz", sweep.delta_f)?;
        sweep.n_freq = e.get_or("n_freq", sweep.n_freq)?;
        sweep.prf = e.float_or("prf_hz", sweep.prf)?;
        sweep.modulation_period = 1.0 / (sweep.prf * sweep.n_freq as f64);
        sweep.validate()?;

        let wall = if e.bool_or("wall", true)? {
            let d = WallModel::default();
            let w = WallModel {
                thickness: e.float_or("wall.thickness_m", d.thickness)?,
                relative_permittivity: e.float_or("wall.eps_r", d.relative_permittivity)?,
                two_way_loss_db: e.float_or("wall.loss_db", d.two_way_loss_db)?,
            };
            w.validate()?;
            Some(w)
        } else {
            None
        };

        let template: MotionTemplate = e.get_or::<String>("motion.template", "forward_walk".into())?.parse()?;
        let base = MotionParams::defaults(template);
        let params = MotionParams {
            origin: [
                e.float_or("motion.origin_x", base.origin[0])?,
                e.float_or("motion.origin_y", base.origin[1])?,
                e.float_or("motion.origin_z", base.origin[2])?,
            ],
            speed: e.float_or("motion.speed", base.speed)?,
            drop: e.float_or("motion.drop", base.drop)?,
            duration: e.float_or("motion.duration", base.duration)?,
            onset: e.float_or("motion.onset", base.onset)?,
            cadence: e.float_or("motion.cadence", base.cadence)?,
            limb_amplitude: e.float_or("motion.limb_amplitude", base.limb_amplitude)?,
        };
        params.validate()?;

        let bench_default = BenchmarkSpec::default();
        let clutter = ClutterSpec {
            count: e.get_or("clutter.count", bench_default.clutter.count)?,
            csr_db: e.float_or("clutter.csr_db", bench_default.clutter.csr_db)?,
            min_range: e.float_or("clutter.min_range_m", bench_default.clutter.min_range)?,
            max_range: e.float_or("clutter.max_range_m", bench_default.clutter.max_range)?,
        };
        let seed: u64 = e.get_or("seed", 1)?;
        let n_slow: usize = e.get_or("n_slow", bench_default.n_slow)?;
        let snr_db = e.float_or("snr_db", bench_default.snr_db)?;
        let gain_drift = e.float_or("gain_drift", bench_default.gain_drift)?;
        let scene = SceneSpec {
            template,
            params,
            n_slow,
            seed,
            snr_db,
            wall,
            gain_drift,
            clutter,
        };

        let pdef = ProcessingParams::default();
        let phase_reference = match e.get_or::<String>("phase_reference", "band_center".into())?.as_str() {
            "band_center" => PhaseReference::BandCenter,
            "start_frequency" => PhaseReference::StartFrequency,
            other => return Err(Error::Config(format!("unknown phase reference `{other}`"))),
        };
        let disabled = |k: &str| e.0.get(k).is_some_and(|v| v == "none");
        let range_window = match disabled("range.min_m") || disabled("range.max_m") {
            true => None,
            false => {
                let (lo, hi) = pdef.range_window.unwrap_or((0.0, f64::INFINITY));
                Some((e.float_or("range.min_m", lo)?, e.float_or("range.max_m", hi)?))
            }
        };
        let rdef = RpcaParams::default();
        let rpca = RpcaParams {
            lambda: e.get("rpca.lambda")?,
            mu0: e.get("rpca.mu0")?,
            rho: e.float_or("rpca.rho", rdef.rho)?,
            mu_max_factor: e.float_or("rpca.mu_max_factor", rdef.mu_max_factor)?,
            tol: e.float_or("rpca.tol", rdef.tol)?,
            max_iter: e.get_or("rpca.max_iter", rdef.max_iter)?,
        };
        rpca.validate()?;
        let sdef = StftParams::default();
        let stft = StftParams {
            window_len: e.get_or("stft.window", sdef.window_len)?,
            overlap: e.get_or("stft.overlap", sdef.overlap)?,
            fft_size: e.get_or("stft.fft_size", sdef.fft_size)?,
            window_kind: e
                .get_or::<String>("stft.taper", "hanning".into())?
                .parse::<WindowKind>()?,
        };
        stft.validate()?;
        let use_range_max = match e.get_or::<String>("stack", "sum".into())?.as_str() {
            "sum" => false,
            "max" => true,
            other => return Err(Error::Config(format!("unknown stacking `{other}` (sum or max)"))),
        };
        let gate_fraction = e.float_or("gate.energy_fraction", pdef.gate_fraction)?;
        if !(gate_fraction > 0.0 && gate_fraction <= 1.0) {
            return Err(Error::Config("`gate.energy_fraction` must lie in (0, 1]".into()));
        }
        let feature_dims = (
            e.get_or("feature.rows", pdef.feature_dims.0)?,
            e.get_or("feature.cols", pdef.feature_dims.1)?,
        );
        if feature_dims.0 == 0 || feature_dims.1 == 0 {
            return Err(Error::Config("feature dimensions must be nonzero".into()));
        }
        let channel: usize = e.get_or("channel", pdef.channel)?;
        sweep.channel(channel)?;
        let processing = ProcessingParams {
            channel,
            phase_reference,
            range_window,
            rpca,
            gate_fraction,
            stft,
            use_range_max,
            feature_dims,
        };

        let filter: FilterMethod = e.get_or::<String>("filter", "rpca".into())?.parse()?;
        let feature = match e.0.get("feature").map(String::as_str) {
            None | Some("all") => None,
            Some(s) => Some(s.parse()?),
        };
        let components: Option<usize> = e.get("classify.components")?;
        if components == Some(0) {
            return Err(Error::Config("`classify.components` must be at least 1".into()));
        }
        let k: usize = e.get_or("classify.k", 3)?;
        let train_frac = e.float_or("classify.train_frac", 0.8)?;
        if !(train_frac > 0.0 && train_frac < 1.0) {
            return Err(Error::Config("`classify.train_frac` must lie in (0, 1)".into()));
        }
        let eval_seeds: usize = e.get_or("classify.seeds", 10)?;
        if k == 0 || eval_seeds == 0 {
            return Err(Error::Config(
                "`classify.k` and `classify.seeds` must be at least 1".into(),
            ));
        }

        let classes = match e.0.get("dataset.classes") {
            None => bench_default.classes.clone(),
            Some(list) => list
                .split(',')
                .map(|s| s.trim().parse::<MotionTemplate>())
                .collect::<Result<Vec<_>>>()?,
        };
        let benchmark = BenchmarkSpec {
            classes,
            samples_per_class: e.get_or("dataset.samples_per_class", bench_default.samples_per_class)?,
            n_slow,
            position_jitter: e.float_or("dataset.position_jitter_m", bench_default.position_jitter)?,
            snr_db,
            gain_drift,
            wall,
            clutter,
            seed,
        };

        let floor_db = e.float_or("image.floor_db", crate::export::DEFAULT_FLOOR_DB)?;
        if !(floor_db.is_finite() && floor_db > 0.0) {
            return Err(Error::Config("`image.floor_db` must be positive".into()));
        }
        let out_dir = PathBuf::from(e.get_or::<String>("out", "out".into())?);

        Ok(Self {
            entries,
            sweep,
            scene,
            processing,
            filter,
            feature,
            components,
            k,
            train_frac,
            eval_seeds,
            benchmark,
            floor_db,
            out_dir,
        })
    }
}
