use faer::{Mat, Side};
use ndarray::Array2;

use super::features::FeatureMap;
use crate::error::{Error, Result};

/// Mean image and leading right-side eigenvectors of the image scatter matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionBasis {
    pub mean_map: Array2<f64>,
    /// `W × d`, orthonormal columns.
    pub components: Array2<f64>,
    /// Descending, clamped at zero.
    pub eigenvalues: Vec<f64>,
}

impl ProjectionBasis {
    pub fn dims(&self) -> (usize, usize) {
        self.mean_map.dim()
    }

    pub fn n_components(&self) -> usize {
        self.components.ncols()
    }
}

fn check_samples(samples: &[&Array2<f64>]) -> Result<(usize, usize)> {
    if samples.len() < 2 {
        return Err(Error::param("samples", "need at least two samples"));
    }
    let dims = samples[0].dim();
    if let Some(bad) = samples.iter().find(|s| s.dim() != dims) {
        return Err(Error::DimensionMismatch(format!(
            "sample {:?} vs {:?}",
            bad.dim(),
            dims
        )));
    }
    Ok(dims)
}

fn mean_of(samples: &[&Array2<f64>]) -> Array2<f64> {
    let mut mean = Array2::zeros(samples[0].dim());
    for s in samples {
        mean += *s;
    }
    mean / samples.len() as f64
}

/// `G = (1/N) Σ (Aᵢ − Ā)ᵀ (Aᵢ − Ā)`, a `W × W` symmetric PSD matrix.
pub fn scatter_matrix(samples: &[&Array2<f64>]) -> Result<Array2<f64>> {
    let (_, w) = check_samples(samples)?;
    let mean = mean_of(samples);
    let mut g = Array2::<f64>::zeros((w, w));
    for s in samples {
        let centered = *s - &mean;
        g += &centered.t().dot(&centered);
    }
    g /= samples.len() as f64;
    // symmetrize away rounding
    let gt = g.t().to_owned();
    Ok((g + gt) * 0.5)
}

pub fn twodpca_fit(samples: &[FeatureMap], d: usize) -> Result<ProjectionBasis> {
    let refs: Vec<&Array2<f64>> = samples.iter().map(|s| &s.data).collect();
    twodpca_fit_matrices(&refs, d)
}

pub fn twodpca_fit_matrices(samples: &[&Array2<f64>], d: usize) -> Result<ProjectionBasis> {
    let (_, w) = check_samples(samples)?;
    if d == 0 || d > w {
        return Err(Error::param("components", format!("{d} not in 1..={w}")));
    }
    let g = scatter_matrix(samples)?;
    let gm = Mat::<f64>::from_fn(w, w, |i, j| g[[i, j]]);
    let evd = gm
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Solver(format!("eigendecomposition failed: {e:?}")))?;
    let u = evd.U();
    let s = evd.S().column_vector();

    let mut order: Vec<usize> = (0..w).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));

    let mut components = Array2::<f64>::zeros((w, d));
    let mut eigenvalues = Vec::with_capacity(d);
    for (c, &idx) in order.iter().take(d).enumerate() {
        eigenvalues.push(s[idx].max(0.0));
        // sign convention: the largest-magnitude entry is positive
        let mut pivot = 0;
        for r in 0..w {
            if u[(r, idx)].abs() > u[(pivot, idx)].abs() + 1e-12 {
                pivot = r;
            }
        }
        let sign = if u[(pivot, idx)] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..w {
            components[[r, c]] = sign * u[(r, idx)];
        }
    }
    Ok(ProjectionBasis {
        mean_map: mean_of(samples),
        components,
        eigenvalues,
    })
}

/// `(A − Ā)·X`, an `H × d` feature matrix.
pub fn twodpca_project(sample: &Array2<f64>, basis: &ProjectionBasis) -> Result<Array2<f64>> {
    if sample.dim() != basis.dims() {
        return Err(Error::DimensionMismatch(format!(
            "sample {:?} vs basis {:?}",
            sample.dim(),
            basis.dims()
        )));
    }
    Ok((sample - &basis.mean_map).dot(&basis.components))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
        Array2::from_shape_fn((rows, cols), |_| rng.random())
    }

    #[test]
    fn identical_samples_have_zero_scatter() {
        let a = array![[1.0, 2.0], [3.0, 4.0]];
        let basis = twodpca_fit_matrices(&[&a, &a, &a], 2).unwrap();
        assert!(basis.eigenvalues.iter().all(|&v| v == 0.0));
        assert!(twodpca_project(&a, &basis).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn differing_column_dominates() {
        // samples differ only in column 1: G = diag(0, 1/2)
        let a = array![[1.0, 0.0], [1.0, 0.0]];
        let b = array![[1.0, 1.0], [1.0, 1.0]];
        let basis = twodpca_fit_matrices(&[&a, &b], 2).unwrap();
        assert!((basis.eigenvalues[0] - 0.5).abs() < 1e-12);
        assert!(basis.eigenvalues[1].abs() < 1e-12);
        assert!((basis.components[[1, 0]] - 1.0).abs() < 1e-12);
        assert!(basis.components[[0, 0]].abs() < 1e-12);
    }

    #[test]
    fn basis_is_orthonormal_and_sorted() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples: Vec<Array2<f64>> = (0..12).map(|_| random(9, 7, &mut rng)).collect();
        let refs: Vec<&Array2<f64>> = samples.iter().collect();
        let basis = twodpca_fit_matrices(&refs, 7).unwrap();
        let gram = basis.components.t().dot(&basis.components);
        for i in 0..7 {
            for j in 0..7 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((gram[[i, j]] - expected).abs() < 1e-10);
            }
        }
        assert!(basis.eigenvalues.windows(2).all(|p| p[0] >= p[1]));
        assert!(basis.eigenvalues.iter().all(|&v| v >= 0.0));
        // each column is an eigenvector of G
        let g = scatter_matrix(&refs).unwrap();
        for c in 0..7 {
            let v = basis.components.column(c);
            let gv = g.dot(&v);
            for r in 0..7 {
                assert!((gv[r] - basis.eigenvalues[c] * v[r]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn full_basis_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let samples: Vec<Array2<f64>> = (0..6).map(|_| random(5, 4, &mut rng)).collect();
        let refs: Vec<&Array2<f64>> = samples.iter().collect();
        let basis = twodpca_fit_matrices(&refs, 4).unwrap();
        let probe = random(5, 4, &mut rng);
        let y = twodpca_project(&probe, &basis).unwrap();
        let centered = &probe - &basis.mean_map;
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nc = centered.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((ny - nc).abs() < 1e-10);
    }

    #[test]
    fn projection_matches_explicit_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let samples: Vec<Array2<f64>> = (0..4).map(|_| random(3, 3, &mut rng)).collect();
        let refs: Vec<&Array2<f64>> = samples.iter().collect();
        let basis = twodpca_fit_matrices(&refs, 2).unwrap();
        let a = random(3, 3, &mut rng);
        let y = twodpca_project(&a, &basis).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += (a[[i, k]] - basis.mean_map[[i, k]]) * basis.components[[k, j]];
                }
                assert!((y[[i, j]] - acc).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let a = Array2::<f64>::zeros((3, 3));
        let b = Array2::<f64>::zeros((3, 4));
        assert!(twodpca_fit_matrices(&[&a], 1).is_err());
        assert!(matches!(
            twodpca_fit_matrices(&[&a, &b], 1),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(twodpca_fit_matrices(&[&a, &a], 4).is_err());
        assert!(twodpca_fit_matrices(&[&a, &a], 0).is_err());
        let basis = twodpca_fit_matrices(&[&a, &a], 2).unwrap();
        assert!(twodpca_project(&b, &basis).is_err());
    }
}
