//! 2D-PCA features and nearest-neighbour classification of motion maps.

mod eval;
mod features;
mod knn;
mod pca;

pub use eval::{
    evaluate_seeds, evaluate_split, stratified_split, ConfusionMatrix, EvalParams, Evaluation, LabeledDataset,
    SplitResult,
};
pub use features::{
    bilinear_resize, prepare_feature_map, FeatureKind, FeatureMap, FeatureSource, DB_FLOOR, DEFAULT_DIMS,
};
pub use knn::{frobenius_distance, knn_classify};
pub use pca::{scatter_matrix, twodpca_fit, twodpca_fit_matrices, twodpca_project, ProjectionBasis};
