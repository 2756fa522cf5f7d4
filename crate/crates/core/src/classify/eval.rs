use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::features::FeatureMap;
use super::knn::knn_classify;
use super::pca::{twodpca_fit_matrices, twodpca_project};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub samples: Vec<FeatureMap>,
    pub class_names: Vec<String>,
}

impl LabeledDataset {
    /// Checks that labels are in range, dimensions agree and no class is empty.
    pub fn new(samples: Vec<FeatureMap>, class_names: Vec<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::param("dataset", "no samples"));
        }
        let dims = samples[0].dims();
        let mut counts = vec![0usize; class_names.len()];
        for s in &samples {
            if s.dims() != dims {
                return Err(Error::DimensionMismatch(format!("sample {:?} vs {:?}", s.dims(), dims)));
            }
            if s.label >= class_names.len() {
                return Err(Error::param(
                    "label",
                    format!("{} outside {} classes", s.label, class_names.len()),
                ));
            }
            counts[s.label] += 1;
        }
        if let Some(c) = counts.iter().position(|&n| n == 0) {
            return Err(Error::param(
                "dataset",
                format!("class `{}` has no samples", class_names[c]),
            ));
        }
        Ok(Self { samples, class_names })
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for s in &self.samples {
            counts[s.label] += 1;
        }
        counts
    }

    pub fn dims(&self) -> (usize, usize) {
        self.samples[0].dims()
    }
}

/// Row-normalized confusion matrix (rows true class, columns prediction).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub class_names: Vec<String>,
    pub fractions: Array2<f64>,
    /// Test samples per true class.
    pub support: Vec<usize>,
}

impl ConfusionMatrix {
    /// Rows without support stay zero.
    pub fn from_predictions(class_names: &[String], truth: &[usize], predicted: &[usize]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels vs {} predictions",
                truth.len(),
                predicted.len()
            )));
        }
        let n = class_names.len();
        let mut counts = Array2::<f64>::zeros((n, n));
        let mut support = vec![0usize; n];
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= n || p >= n {
                return Err(Error::param("label", format!("label outside {n} classes")));
            }
            counts[[t, p]] += 1.0;
            support[t] += 1;
        }
        for (r, &s) in support.iter().enumerate() {
            if s > 0 {
                counts.row_mut(r).mapv_inplace(|v| v / s as f64);
            }
        }
        Ok(Self {
            class_names: class_names.to_vec(),
            fractions: counts,
            support,
        })
    }

    /// Support-weighted diagonal.
    pub fn accuracy(&self) -> f64 {
        let total: usize = self.support.iter().sum();
        if total == 0 {
            return 0.0;
        }
        self.support
            .iter()
            .enumerate()
            .map(|(c, &s)| s as f64 * self.fractions[[c, c]])
            .sum::<f64>()
            / total as f64
    }

    /// Entrywise mean; supports are summed.
    pub fn mean(matrices: &[ConfusionMatrix]) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::param("matrices", "nothing to average"))?;
        let mut fractions = Array2::<f64>::zeros(first.fractions.dim());
        let mut support = vec![0usize; first.support.len()];
        for m in matrices {
            if m.fractions.dim() != fractions.dim() {
                return Err(Error::DimensionMismatch("confusion matrices differ in size".into()));
            }
            fractions += &m.fractions;
            for (a, b) in support.iter_mut().zip(&m.support) {
                *a += b;
            }
        }
        Ok(Self {
            class_names: first.class_names.clone(),
            fractions: fractions / matrices.len() as f64,
            support,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalParams {
    pub train_frac: f64,
    pub components: usize,
    pub k: usize,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            train_frac: 0.8,
            components: 16,
            k: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub seed: u64,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub per_seed: Vec<SplitResult>,
    pub mean_confusion: ConfusionMatrix,
    pub mean_accuracy: f64,
}

/// Per-class random split: `round(train_frac·n)` training samples, kept in
/// `1..n` so every class appears on both sides. Returns (train, test) indices.
pub fn stratified_split(
    labels: &[usize],
    n_classes: usize,
    train_frac: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::param("train_frac", "must lie in (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in 0..n_classes {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        if members.len() < 2 {
            return Err(Error::param(
                "dataset",
                format!("class {class} has fewer than two samples"),
            ));
        }
        members.shuffle(&mut rng);
        let n_train = ((train_frac * members.len() as f64).round() as usize).clamp(1, members.len() - 1);
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    Ok((train, test))
}

/// One stratified split: fit 2D-PCA on the training part, classify the rest.
pub fn evaluate_split(dataset: &LabeledDataset, params: &EvalParams, seed: u64) -> Result<SplitResult> {
    let labels: Vec<usize> = dataset.samples.iter().map(|s| s.label).collect();
    let (train_idx, test_idx) = stratified_split(&labels, dataset.n_classes(), params.train_frac, seed)?;
    if params.k > train_idx.len() {
        return Err(Error::param(
            "k",
            format!("{} exceeds the {} training samples", params.k, train_idx.len()),
        ));
    }
    let train_maps: Vec<&Array2<f64>> = train_idx.iter().map(|&i| &dataset.samples[i].data).collect();
    let basis = twodpca_fit_matrices(&train_maps, params.components)?;
    let train: Vec<(Array2<f64>, usize)> = train_idx
        .iter()
        .map(|&i| Ok((twodpca_project(&dataset.samples[i].data, &basis)?, labels[i])))
        .collect::<Result<_>>()?;

    let mut truth = Vec::with_capacity(test_idx.len());
    let mut predicted = Vec::with_capacity(test_idx.len());
    for &i in &test_idx {
        let features = twodpca_project(&dataset.samples[i].data, &basis)?;
        predicted.push(knn_classify(&train, &features, params.k)?);
        truth.push(labels[i]);
    }
    let confusion = ConfusionMatrix::from_predictions(&dataset.class_names, &truth, &predicted)?;
    let accuracy = confusion.accuracy();
    Ok(SplitResult {
        seed,
        confusion,
        accuracy,
    })
}

/// Repeats [`evaluate_split`] for every seed and averages.
pub fn evaluate_seeds(dataset: &LabeledDataset, params: &EvalParams, seeds: &[u64]) -> Result<Evaluation> {
    if seeds.is_empty() {
        return Err(Error::param("seeds", "need at least one seed"));
    }
    let per_seed = seeds
        .iter()
        .map(|&s| evaluate_split(dataset, params, s))
        .collect::<Result<Vec<_>>>()?;
    let mean_confusion = ConfusionMatrix::mean(&per_seed.iter().map(|r| r.confusion.clone()).collect::<Vec<_>>())?;
    let mean_accuracy = per_seed.iter().map(|r| r.accuracy).sum::<f64>() / per_seed.len() as f64;
    Ok(Evaluation {
        per_seed,
        mean_confusion,
        mean_accuracy,
    })
}
