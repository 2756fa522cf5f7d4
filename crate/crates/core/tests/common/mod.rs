//! Independent oracles shared by integration tests.

#![allow(dead_code)]

use ndarray::Array2;

/// Cyclic Jacobi eigensolver for small symmetric matrices. Returns
/// eigenvalues in descending order with matching unit eigenvectors as
/// columns.
pub fn jacobi_eigen(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = Array2::<f64>::eye(n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[[i, j]] * a[[i, j]])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * a[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[j, j]].total_cmp(&a[[i, i]]));
    let values = order.iter().map(|&i| a[[i, i]]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| v[[r, order[c]]]);
    (values, vectors)
}

/// `(1/N) Σ (Aᵢ − Ā)ᵀ (Aᵢ − Ā)` by explicit loops.
pub fn brute_scatter(samples: &[Array2<f64>]) -> Array2<f64> {
    let (h, w) = samples[0].dim();
    let n = samples.len() as f64;
    let mean = Array2::from_shape_fn((h, w), |(r, c)| samples.iter().map(|s| s[[r, c]]).sum::<f64>() / n);
    let mut g = Array2::<f64>::zeros((w, w));
    for s in samples {
        for i in 0..w {
            for j in 0..w {
                let mut acc = 0.0;
                for r in 0..h {
                    acc += (s[[r, i]] - mean[[r, i]]) * (s[[r, j]] - mean[[r, j]]);
                }
                g[[i, j]] += acc / n;
            }
        }
    }
    g
}

pub fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}
