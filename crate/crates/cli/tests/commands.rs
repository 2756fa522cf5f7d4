use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ndarray::Array2;
use num_complex::Complex64;
use twmd_core::archive::{load_range_map, save_range_map};
use twmd_core::range_map::RangeMap;

fn twmd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twmd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = twmd(args);
    assert!(
        out.status.success(),
        "twmd {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Short records keep the tests quick.
fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("test.conf");
    let n_slow = if extra.contains("n_slow") { "" } else { "n_slow = 64\n" };
    fs::write(&path, format!("# test scene\n{n_slow}{extra}")).unwrap();
    path
}

fn frob(map: &RangeMap) -> f64 {
    map.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn sorted_tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn commands_are_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = write_config(tmp.path(), "");
    let mut trees = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        ok(&["simulate", "--config", s(&conf), "--out", s(&out), "--seed", "5"]);
        let rmap = out.join("forward_walk_seed5.rmap");
        ok(&[
            "filter",
            s(&rmap),
            "--config",
            s(&conf),
            "--out",
            s(&out),
            "--save-low-rank",
        ]);
        ok(&[
            "spectrogram",
            s(&out.join("forward_walk_seed5_rpca.rmap")),
            "--config",
            s(&conf),
            "--out",
            s(&out),
        ]);
        ok(&["export", s(&rmap), "--config", s(&conf), "--out", s(&out)]);
        trees.push(sorted_tree(&out));
    }
    assert_eq!(trees[0].len(), 8);
    assert_eq!(trees[0], trees[1]);

    let other = tmp.path().join("c");
    ok(&["simulate", "--config", s(&conf), "--out", s(&other), "--seed", "6"]);
    assert_ne!(
        fs::read(tmp.path().join("a/forward_walk_seed5.rmap")).unwrap(),
        fs::read(other.join("forward_walk_seed6.rmap")).unwrap()
    );
}

#[test]
fn method_none_copies_the_archive() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = write_config(tmp.path(), "");
    let out = tmp.path();
    ok(&["simulate", "--config", s(&conf), "--out", s(out)]);
    let input = out.join("forward_walk_seed1.rmap");
    ok(&["filter", s(&input), "--method", "none", "--out", s(out)]);
    assert_eq!(
        fs::read(&input).unwrap(),
        fs::read(out.join("forward_walk_seed1_none.rmap")).unwrap()
    );
}

#[test]
fn static_scene_leaves_almost_nothing_sparse() {
    let tmp = tempfile::tempdir().unwrap();
    // as many sweeps as range bins; shorter records let a dominant static
    // peak cost less as sparse than as low rank
    let conf = write_config(
        tmp.path(),
        "snr_db = inf\ngain_drift = 0\nclutter.count = 0\nn_slow = 128\n",
    );
    let out = tmp.path();
    ok(&[
        "simulate",
        "--config",
        s(&conf),
        "--template",
        "static",
        "--out",
        s(out),
    ]);
    let input = out.join("static_seed1.rmap");
    let raw = load_range_map(&input).unwrap();
    for t in 1..raw.cols() {
        assert_eq!(raw.data.column(t), raw.data.column(0));
    }
    ok(&["filter", s(&input), "--config", s(&conf), "--out", s(out)]);
    let sparse = load_range_map(&out.join("static_seed1_rpca.rmap")).unwrap();
    assert!(
        frob(&sparse) <= 1e-3 * frob(&raw),
        "{} vs {}",
        frob(&sparse),
        frob(&raw)
    );
}

#[test]
fn mean_subtraction_is_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = write_config(tmp.path(), "");
    let out = tmp.path();
    ok(&["simulate", "--config", s(&conf), "--out", s(out)]);
    ok(&[
        "filter",
        s(&out.join("forward_walk_seed1.rmap")),
        "--method",
        "mean_sub",
        "--out",
        s(out),
    ]);
    let once_path = out.join("forward_walk_seed1_mean_sub.rmap");
    ok(&["filter", s(&once_path), "--method", "mean_sub", "--out", s(out)]);
    let once = load_range_map(&once_path).unwrap();
    let twice = load_range_map(&out.join("forward_walk_seed1_mean_sub_mean_sub.rmap")).unwrap();
    let scale = frob(&once);
    for (a, b) in once.data.iter().zip(twice.data.iter()) {
        assert!((a - b).norm() <= 1e-12 * scale);
    }
}

#[test]
fn forward_walk_peak_moves_toward_the_radar() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = write_config(
        tmp.path(),
        "snr_db = inf\ngain_drift = 0\nclutter.count = 0\nwall = false\nn_slow = 128\nmotion.limb_amplitude = 0\n",
    );
    let out = tmp.path();
    ok(&["simulate", "--config", s(&conf), "--out", s(out)]);
    ok(&[
        "filter",
        s(&out.join("forward_walk_seed1.rmap")),
        "--method",
        "mean_sub",
        "--out",
        s(out),
    ]);
    let map = load_range_map(&out.join("forward_walk_seed1_mean_sub.rmap")).unwrap();
    let peaks: Vec<usize> = (0..map.cols())
        .map(|t| {
            let col = map.data.column(t);
            (0..col.len())
                .max_by(|&a, &b| col[a].norm().total_cmp(&col[b].norm()))
                .unwrap()
        })
        .collect();
    // the walker covers about a metre over the record
    let start = peaks[..10].iter().sum::<usize>() as f64 / 10.0;
    let end = peaks[peaks.len() - 10..].iter().sum::<usize>() as f64 / 10.0;
    assert!(start - end > 0.5 / map.bin_spacing, "start {start} end {end}");
    // smoothed over a quarter second the track never recedes
    let smooth: Vec<f64> = peaks
        .windows(28)
        .map(|w| w.iter().sum::<usize>() as f64 / 28.0)
        .collect();
    for w in smooth.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "{peaks:?}");
    }
}

#[test]
fn doppler_tone_lands_on_its_axis_entry() {
    let tmp = tempfile::tempdir().unwrap();
    let prf = 113.0;
    let mut data = Array2::from_elem((12, 128), Complex64::new(0.0, 0.0));
    for t in 0..128 {
        data[[5, t]] = Complex64::from_polar(1.0, 2.0 * PI * 20.0 * t as f64 / prf);
    }
    let input = tmp.path().join("tone.rmap");
    save_range_map(&input, &RangeMap::new(data, 0.03, prf)).unwrap();
    ok(&["spectrogram", s(&input), "--out", s(tmp.path())]);
    let csv = fs::read_to_string(tmp.path().join("tone_spectrogram.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    let frames = lines.next().unwrap().split(',').count() - 1;
    // default window 32, overlap 31
    assert_eq!(frames, 128 - 32 + 1);
    let rows: Vec<(f64, Vec<f64>)> = lines
        .map(|l| {
            let mut f = l.split(',').map(|v| v.parse::<f64>().unwrap());
            (f.next().unwrap(), f.collect())
        })
        .collect();
    let nearest = rows
        .iter()
        .map(|r| r.0)
        .min_by(|a, b| (a - 20.0).abs().total_cmp(&(b - 20.0).abs()))
        .unwrap();
    for frame in 0..frames {
        let ridge = rows.iter().max_by(|a, b| a.1[frame].total_cmp(&b.1[frame])).unwrap();
        assert_eq!(ridge.0, nearest);
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.conf");
    fs::write(&bad, "no_such_key = 1\n").unwrap();
    assert_eq!(
        twmd(&["simulate", "--config", s(&bad), "--out", s(tmp.path())])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(twmd(&["simulate", "--set", "snr_db=loud"]).status.code(), Some(2));
    assert_eq!(twmd(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(twmd(&["filter", "--method", "svd", "x.rmap"]).status.code(), Some(2));

    let zero = tmp.path().join("zero.rmap");
    save_range_map(&zero, &RangeMap::new(Array2::zeros((16, 64)), 0.03, 113.0)).unwrap();
    assert_eq!(
        twmd(&["spectrogram", s(&zero), "--out", s(tmp.path())]).status.code(),
        Some(1)
    );

    let conf = write_config(tmp.path(), "rpca.max_iter = 1\n");
    ok(&["simulate", "--config", s(&conf), "--out", s(tmp.path())]);
    let out = twmd(&[
        "filter",
        s(&tmp.path().join("forward_walk_seed1.rmap")),
        "--config",
        s(&conf),
        "--out",
        s(tmp.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(tmp.path().join("forward_walk_seed1_rpca_diagnostics.txt").exists());
}

#[test]
fn batch_dataset_classifies_separable_toy_classes() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = write_config(
        tmp.path(),
        "dataset.classes = forward_walk, sit_down\ndataset.samples_per_class = 10\nclassify.seeds = 3\n",
    );
    let data = tmp.path().join("data");
    ok(&["simulate", "--batch", "--config", s(&conf), "--out", s(&data)]);
    let manifest = fs::read_to_string(data.join("manifest.txt")).unwrap();
    assert_eq!(manifest.lines().filter(|l| l.starts_with("sample ")).count(), 20);
    assert!(manifest.contains("class 1 sit_down 10"));
    assert!(data.join("sit_down/sit_down_009.rmap").exists());

    let results = tmp.path().join("results");
    let out = ok(&[
        "classify",
        s(&data.join("manifest.txt")),
        "--config",
        s(&conf),
        "--feature",
        "rpca_spec",
        "--out",
        s(&results),
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("rpca_spec: mean accuracy 1.0000"), "{stdout}");
    let table = fs::read_to_string(results.join("accuracy.txt")).unwrap();
    assert!(table.lines().nth(1).unwrap().starts_with("rpca_spec"));
    assert!(table.contains(" 5  3 "));
    for seed in 1..4 {
        assert!(results.join(format!("confusion_rpca_spec_seed{seed}.csv")).exists());
    }
    let mean = fs::read_to_string(results.join("confusion_rpca_spec_mean.txt")).unwrap();
    assert!(mean.ends_with("accuracy 1.0000\n"));

    // a modified archive is refused
    fs::write(data.join("sit_down/sit_down_003.rmap"), b"RMAP").unwrap();
    let refused = twmd(&["classify", s(&data.join("manifest.txt")), "--out", s(&results)]);
    assert_eq!(refused.status.code(), Some(2));
}
