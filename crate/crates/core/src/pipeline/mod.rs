//! Commands behind the `twmd` binary. Each command reads a resolved
//! [`PipelineConfig`], writes its outputs atomically under `out_dir` and
//! returns a [`Report`] listing what it wrote.

mod config;
mod manifest;

pub use config::{ConfigEntries, FilterMethod, PipelineConfig, KNOWN_KEYS};
pub use manifest::{sha256_hex, DatasetManifest, ManifestSample};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::archive::{atomic_write, from_bytes, load_range_map, to_bytes};
use crate::classify::{
    evaluate_seeds, prepare_feature_map, EvalParams, FeatureKind, FeatureMap, FeatureSource, LabeledDataset,
};
use crate::dataset::{build_scene, map_spectrogram, rpca_filter, simulate_range_map};
use crate::error::{Error, Result};
use crate::export;
use crate::range_map::{mean_subtract, RangeMap};
use crate::rpca::RpcaResult;

/// Files written by a command and a short human-readable summary.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub written: Vec<PathBuf>,
    pub summary: Vec<String>,
}

impl Report {
    fn write(&mut self, path: PathBuf, bytes: &[u8]) -> Result<()> {
        atomic_write(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Simulates the configured scene (one archive) or, with `batch`, the whole
/// labelled dataset plus its manifest.
pub fn cmd_simulate(cfg: &PipelineConfig, batch: bool) -> Result<Report> {
    ensure_dir(&cfg.out_dir)?;
    let mut report = Report::default();
    if !batch {
        let scene = build_scene(&cfg.scene, cfg.sweep.prf)?;
        let map = simulate_range_map(&scene, &cfg.sweep, &cfg.processing)?;
        let path = cfg
            .out_dir
            .join(format!("{}_seed{}.rmap", cfg.scene.template, cfg.scene.seed));
        report.write(path, &to_bytes(&map)?)?;
        report.summary.push(format!(
            "{} range map, {} bins x {} sweeps, {:.2}-{:.2} m",
            cfg.scene.template,
            map.rows(),
            map.cols(),
            map.range_of(0),
            map.range_of(map.rows().saturating_sub(1))
        ));
        return Ok(report);
    }

    let spec = &cfg.benchmark;
    if spec.classes.is_empty() || spec.samples_per_class == 0 {
        return Err(Error::Config("dataset needs at least one class and one sample".into()));
    }
    let mut samples = Vec::new();
    for (class, template) in spec.classes.iter().enumerate() {
        let dir = cfg.out_dir.join(template.name());
        ensure_dir(&dir)?;
        for index in 0..spec.samples_per_class {
            let scene_spec = spec.scene_spec(class, index);
            let scene = build_scene(&scene_spec, cfg.sweep.prf)?;
            let map = simulate_range_map(&scene, &cfg.sweep, &cfg.processing)?;
            let bytes = to_bytes(&map)?;
            let rel = PathBuf::from(template.name()).join(format!("{}_{index:03}.rmap", template.name()));
            report.write(cfg.out_dir.join(&rel), &bytes)?;
            samples.push(ManifestSample {
                class,
                seed: scene_spec.seed,
                sha256: sha256_hex(&bytes),
                path: rel,
            });
        }
    }
    let manifest = DatasetManifest {
        config_sha256: cfg.entries.sha256(),
        seed: spec.seed,
        class_names: spec.class_names(),
        samples,
    };
    report.write(cfg.out_dir.join("manifest.txt"), manifest.render().as_bytes())?;
    report.summary.push(format!(
        "{} classes x {} samples written with manifest",
        spec.classes.len(),
        spec.samples_per_class
    ));
    Ok(report)
}

fn rpca_diagnostics(out: &mut String, r: &RpcaResult) {
    let _ = writeln!(out, "lambda {}", r.lambda);
    let _ = writeln!(out, "iterations {}", r.iterations);
    let _ = writeln!(out, "residual {}", r.residual);
    let _ = writeln!(out, "rank_estimate {}", r.rank_estimate);
    let _ = writeln!(out, "converged {}", r.converged);
}

/// Applies the configured clutter filter to one archive.
///
/// `none` copies the input bytes unchanged. For `rpca` the sparse part is the
/// filtered map and the low-rank part is optionally kept. Solver diagnostics
/// go to a sidecar text file, which is written even when the solver stops at
/// its iteration cap (that case then returns [`Error::Solver`]).
pub fn cmd_filter(cfg: &PipelineConfig, input: &Path, save_low_rank: bool) -> Result<Report> {
    let bytes = fs::read(input)?;
    ensure_dir(&cfg.out_dir)?;
    let method = cfg.filter;
    let base = format!("{}_{}", stem(input), method);
    let mut report = Report::default();
    let out_path = cfg.out_dir.join(format!("{base}.rmap"));

    let mut diag = String::new();
    let _ = writeln!(diag, "method {method}");
    let _ = writeln!(diag, "input {}", file_name(input));
    let _ = writeln!(diag, "input_sha256 {}", sha256_hex(&bytes));

    if method == FilterMethod::None {
        report.write(out_path, &bytes)?;
        report.write(cfg.out_dir.join(format!("{base}_diagnostics.txt")), diag.as_bytes())?;
        report.summary.push("copied unchanged".into());
        return Ok(report);
    }

    let map = from_bytes(&bytes)?;
    let _ = writeln!(diag, "rows {}", map.rows());
    let _ = writeln!(diag, "cols {}", map.cols());
    let _ = writeln!(diag, "input_norm {}", map.frobenius_norm());
    let mut converged = true;
    let filtered = match method {
        FilterMethod::MeanSub => mean_subtract(&map)?,
        FilterMethod::Rpca => {
            let (sparse, result) = rpca_filter(&map, &cfg.processing.rpca)?;
            rpca_diagnostics(&mut diag, &result);
            converged = result.converged;
            if save_low_rank {
                let low = map.with_data(result.low_rank.clone());
                let _ = writeln!(diag, "low_rank_norm {}", low.frobenius_norm());
                report.write(cfg.out_dir.join(format!("{base}_lowrank.rmap")), &to_bytes(&low)?)?;
            }
            report.summary.push(format!(
                "rpca: {} iterations, residual {:.3e}, rank {}",
                result.iterations, result.residual, result.rank_estimate
            ));
            sparse
        }
        FilterMethod::None => unreachable!(),
    };
    let _ = writeln!(diag, "output_norm {}", filtered.frobenius_norm());
    report.write(out_path, &to_bytes(&filtered)?)?;
    let diag_path = cfg.out_dir.join(format!("{base}_diagnostics.txt"));
    report.write(diag_path.clone(), diag.as_bytes())?;
    if !converged {
        return Err(Error::Solver(format!(
            "rpca did not converge within {} iterations; see {}",
            cfg.processing.rpca.max_iter,
            diag_path.display()
        )));
    }
    report.summary.push(format!("{method} applied to {}", file_name(input)));
    Ok(report)
}

/// Gate, stack and STFT of one (usually filtered) archive, written as CSV
/// and as a graymap image.
pub fn cmd_spectrogram(cfg: &PipelineConfig, input: &Path) -> Result<Report> {
    let map = load_range_map(input)?;
    ensure_dir(&cfg.out_dir)?;
    let spec = map_spectrogram(&map, &cfg.processing)?;
    let base = format!("{}_spectrogram", stem(input));
    let mut report = Report::default();
    report.write(
        cfg.out_dir.join(format!("{base}.csv")),
        export::spectrogram_csv(&spec).as_bytes(),
    )?;
    report.write(
        cfg.out_dir.join(format!("{base}.pgm")),
        &export::spectrogram_pgm(&spec, cfg.floor_db),
    )?;
    report.summary.push(format!(
        "{} Doppler bins x {} frames, window {} overlap {}",
        spec.frequencies.len(),
        spec.times.len(),
        cfg.processing.stft.window_len,
        cfg.processing.stft.overlap
    ));
    Ok(report)
}

/// Magnitude CSV and image of one archive.
pub fn cmd_export(cfg: &PipelineConfig, input: &Path) -> Result<Report> {
    let map = load_range_map(input)?;
    ensure_dir(&cfg.out_dir)?;
    let base = format!("{}_magnitude", stem(input));
    let mut report = Report::default();
    report.write(
        cfg.out_dir.join(format!("{base}.csv")),
        export::range_map_csv(&map).as_bytes(),
    )?;
    report.write(
        cfg.out_dir.join(format!("{base}.pgm")),
        &export::range_map_pgm(&map, cfg.floor_db),
    )?;
    report
        .summary
        .push(format!("{} bins x {} sweeps exported", map.rows(), map.cols()));
    Ok(report)
}

fn feature_of(map: &RangeMap, kind: FeatureKind, cfg: &PipelineConfig, label: usize) -> Result<FeatureMap> {
    let dims = cfg.processing.feature_dims;
    if kind.is_spectrogram() {
        let spec = map_spectrogram(map, &cfg.processing)?;
        prepare_feature_map(FeatureSource::Spectrogram(&spec), kind, dims, label)
    } else {
        prepare_feature_map(FeatureSource::RangeMap(map), kind, dims, label)
    }
}

/// Feature datasets for `kinds` from the archives listed in a manifest.
pub fn manifest_datasets(
    cfg: &PipelineConfig,
    manifest: &DatasetManifest,
    base: &Path,
    kinds: &[FeatureKind],
) -> Result<(Vec<LabeledDataset>, usize)> {
    let need_ms = kinds.iter().any(|k| !k.uses_rpca());
    let need_rpca = kinds.iter().any(|k| k.uses_rpca());
    let mut per_kind: Vec<Vec<FeatureMap>> = vec![Vec::new(); kinds.len()];
    let mut unconverged = 0;
    for (sample, bytes) in manifest.samples.iter().zip(manifest.read_samples(base)?) {
        let raw: RangeMap = from_bytes(&bytes)?;
        let mean_sub = if need_ms { Some(mean_subtract(&raw)?) } else { None };
        let rpca = if need_rpca {
            let (sparse, result) = rpca_filter(&raw, &cfg.processing.rpca)?;
            if !result.converged {
                unconverged += 1;
            }
            Some(sparse)
        } else {
            None
        };
        for (slot, &kind) in per_kind.iter_mut().zip(kinds) {
            let map = if kind.uses_rpca() {
                rpca.as_ref()
            } else {
                mean_sub.as_ref()
            };
            let map = map.expect("filtered map computed for every requested kind");
            slot.push(feature_of(map, kind, cfg, sample.class)?);
        }
    }
    let datasets = per_kind
        .into_iter()
        .map(|s| LabeledDataset::new(s, manifest.class_names.clone()))
        .collect::<Result<_>>()?;
    Ok((datasets, unconverged))
}

/// Repeated stratified evaluation for the configured feature kind (or all
/// four), writing per-seed and mean confusion matrices and an accuracy table.
pub fn cmd_classify(cfg: &PipelineConfig, manifest_path: &Path) -> Result<Report> {
    let manifest = DatasetManifest::load(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let kinds: Vec<FeatureKind> = match cfg.feature {
        Some(k) => vec![k],
        None => FeatureKind::ALL.to_vec(),
    };
    let (datasets, unconverged) = manifest_datasets(cfg, &manifest, base, &kinds)?;
    ensure_dir(&cfg.out_dir)?;

    let seeds: Vec<u64> = (0..cfg.eval_seeds as u64)
        .map(|i| cfg.scene.seed.wrapping_add(i))
        .collect();
    let mut report = Report::default();
    let mut table = String::from("feature    d  k  train_frac  seeds  mean_acc  min_acc  max_acc\n");
    for (kind, ds) in kinds.iter().zip(&datasets) {
        let params = EvalParams {
            train_frac: cfg.train_frac,
            components: cfg.components.unwrap_or(kind.default_components()),
            k: cfg.k,
        };
        let eval = evaluate_seeds(ds, &params, &seeds)?;
        for r in &eval.per_seed {
            let name = format!("confusion_{kind}_seed{}", r.seed);
            report.write(
                cfg.out_dir.join(format!("{name}.txt")),
                export::confusion_text(&r.confusion).as_bytes(),
            )?;
            report.write(
                cfg.out_dir.join(format!("{name}.csv")),
                export::confusion_csv(&r.confusion).as_bytes(),
            )?;
        }
        let name = format!("confusion_{kind}_mean");
        report.write(
            cfg.out_dir.join(format!("{name}.txt")),
            export::confusion_text(&eval.mean_confusion).as_bytes(),
        )?;
        report.write(
            cfg.out_dir.join(format!("{name}.csv")),
            export::confusion_csv(&eval.mean_confusion).as_bytes(),
        )?;
        let accs: Vec<f64> = eval.per_seed.iter().map(|r| r.accuracy).collect();
        let min = accs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = accs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(
            table,
            "{:<9} {:>2} {:>2}  {:>10.2}  {:>5}  {:>8.4}  {:>7.4}  {:>7.4}",
            kind.name(),
            params.components,
            params.k,
            params.train_frac,
            seeds.len(),
            eval.mean_accuracy,
            min,
            max
        );
        report
            .summary
            .push(format!("{kind}: mean accuracy {:.4}", eval.mean_accuracy));
    }
    if unconverged > 0 {
        let _ = writeln!(table, "# {unconverged} samples hit the rpca iteration cap");
        report
            .summary
            .push(format!("warning: {unconverged} rpca splits hit the iteration cap"));
    }
    report.write(cfg.out_dir.join("accuracy.txt"), table.as_bytes())?;
    Ok(report)
}
