//! Robust PCA: split a complex observation `D` into low-rank `L` plus sparse
//! `S` by minimising `‖L‖_* + λ‖S‖_1` subject to `D = L + S`.
//!
//! The solver is the inexact augmented Lagrange multiplier iteration:
//!
//! ```text
//! L ← SVT_{1/μ}(D − S + Y/μ)
//! S ← shrink_{λ/μ}(D − L + Y/μ)
//! Y ← Y + μ(D − L − S)
//! μ ← min(ρμ, μ_max)
//! ```
//!
//! Everything is complex: the ℓ1 norm is the sum of moduli and shrinkage
//! keeps the phase of every surviving entry.

use faer::{c64, Mat};
use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `1/√max(m, n)`, the weight that gives exact recovery for incoherent
/// low-rank plus sparse matrices.
pub fn default_lambda(m: usize, n: usize) -> f64 {
    1.0 / (m.max(n).max(1) as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpcaParams {
    /// Sparsity weight; `None` uses [`default_lambda`].
    pub lambda: Option<f64>,
    /// Initial penalty; `None` uses `1.25 / σ₁(D)`.
    pub mu0: Option<f64>,
    /// Penalty growth factor per iteration.
    pub rho: f64,
    /// `μ_max = mu_max_factor · μ₀`.
    pub mu_max_factor: f64,
    /// Stop once `‖D − L − S‖_F ≤ tol · ‖D‖_F`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RpcaParams {
    fn default() -> Self {
        Self {
            lambda: None,
            mu0: None,
            rho: 1.5,
            mu_max_factor: 1e7,
            tol: 1e-7,
            max_iter: 500,
        }
    }
}

impl RpcaParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(l) = self.lambda {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::param("lambda", "must be positive"));
            }
        }
        if let Some(mu) = self.mu0 {
            if !(mu.is_finite() && mu > 0.0) {
                return Err(Error::param("mu0", "must be positive"));
            }
        }
        if !(self.rho.is_finite() && self.rho > 1.0) {
            return Err(Error::param("rho", "must be greater than 1"));
        }
        if !(self.mu_max_factor.is_finite() && self.mu_max_factor >= 1.0) {
            return Err(Error::param("mu_max_factor", "must be at least 1"));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::param("tol", "must lie in (0, 1)"));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RpcaResult {
    pub low_rank: Array2<Complex64>,
    pub sparse: Array2<Complex64>,
    pub iterations: usize,
    /// `‖D − L − S‖_F / ‖D‖_F` after the last iteration.
    pub residual: f64,
    /// Number of singular values surviving the last thresholding step.
    pub rank_estimate: usize,
    pub converged: bool,
    pub lambda: f64,
}

/// Soft-thresholds the modulus of `x` by `tau`, keeping its phase.
#[inline]
pub fn complex_shrink(x: Complex64, tau: f64) -> Complex64 {
    let r = x.norm();
    if r <= tau || r == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        x * ((r - tau) / r)
    }
}

fn to_faer(a: &Array2<Complex64>) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

fn to_ndarray(a: &Mat<c64>) -> Array2<Complex64> {
    Array2::from_shape_fn((a.nrows(), a.ncols()), |(i, j)| a[(i, j)])
}

fn svt(a: &Mat<c64>, tau: f64) -> Result<(Mat<c64>, usize)> {
    let svd = a.thin_svd().map_err(|e| Error::Solver(format!("SVD failed: {e:?}")))?;
    let s = svd.S().column_vector();
    let rank = (0..s.nrows()).take_while(|&k| s[k].re > tau).count();
    if rank == 0 {
        return Ok((Mat::zeros(a.nrows(), a.ncols()), 0));
    }
    let u = svd.U();
    let scaled = Mat::from_fn(a.nrows(), rank, |i, k| u[(i, k)] * (s[k].re - tau));
    let v = svd.V().subcols(0, rank);
    Ok((&scaled * v.adjoint(), rank))
}

/// Shrinks every singular value of `a` by `tau` (clamping at zero) and
/// returns the reconstruction with the number of surviving singular values.
pub fn singular_value_threshold(a: &Array2<Complex64>, tau: f64) -> Result<(Array2<Complex64>, usize)> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::param("tau", "must be finite and non-negative"));
    }
    if a.is_empty() {
        return Ok((a.clone(), 0));
    }
    let (out, rank) = svt(&to_faer(a), tau)?;
    Ok((to_ndarray(&out), rank))
}

/// Singular values in non-increasing order.
pub fn singular_values(a: &Array2<Complex64>) -> Result<Vec<f64>> {
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let s = to_faer(a)
        .singular_values()
        .map_err(|e| Error::Solver(format!("SVD failed: {e:?}")))?;
    Ok(s)
}

pub fn nuclear_norm(a: &Array2<Complex64>) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}

/// Sum of entry moduli.
pub fn l1_norm(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|v| v.norm()).sum()
}

pub fn frobenius(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Decomposes `d` into low-rank plus sparse parts.
///
/// Non-convergence within `max_iter` is not an error: the last iterate is
/// returned with `converged == false`.
pub fn rpca_decompose(d: &Array2<Complex64>, params: &RpcaParams) -> Result<RpcaResult> {
    params.validate()?;
    let (m, n) = d.dim();
    if m == 0 || n == 0 {
        return Err(Error::Degenerate("empty observation matrix".into()));
    }
    if d.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::param("D", "contains non-finite entries"));
    }
    let lambda = params.lambda.unwrap_or_else(|| default_lambda(m, n));

    let d_norm = frobenius(d);
    if d_norm == 0.0 {
        return Ok(RpcaResult {
            low_rank: Array2::zeros((m, n)),
            sparse: Array2::zeros((m, n)),
            iterations: 1,
            residual: 0.0,
            rank_estimate: 0,
            converged: true,
            lambda,
        });
    }

    let dm = to_faer(d);
    let sigma1 = dm
        .singular_values()
        .map_err(|e| Error::Solver(format!("SVD failed: {e:?}")))?[0];
    let inf_norm = d.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let dual_scale = sigma1.max(inf_norm / lambda);

    let mut y = Mat::from_fn(m, n, |i, j| dm[(i, j)] / dual_scale);
    let mut s = Mat::<c64>::zeros(m, n);
    let mut l = Mat::<c64>::zeros(m, n);
    let mut work = Mat::<c64>::zeros(m, n);
    let mut mu = params.mu0.unwrap_or(1.25 / sigma1);
    let mu_max = mu * params.mu_max_factor;

    let mut residual = f64::INFINITY;
    let mut rank = 0;
    let mut iterations = 0;
    while iterations < params.max_iter {
        iterations += 1;
        let inv_mu = 1.0 / mu;

        for j in 0..n {
            for i in 0..m {
                work[(i, j)] = dm[(i, j)] - s[(i, j)] + y[(i, j)] * inv_mu;
            }
        }
        let (next_l, r) = svt(&work, inv_mu)?;
        l = next_l;
        rank = r;

        let thresh = lambda * inv_mu;
        let mut res_sq = 0.0;
        for j in 0..n {
            for i in 0..m {
                let dij = dm[(i, j)];
                let lij = l[(i, j)];
                let sij = complex_shrink(dij - lij + y[(i, j)] * inv_mu, thresh);
                s[(i, j)] = sij;
                let z = dij - lij - sij;
                res_sq += z.norm_sqr();
                y[(i, j)] += z * mu;
            }
        }
        mu = (mu * params.rho).min(mu_max);

        residual = res_sq.sqrt() / d_norm;
        if residual <= params.tol {
            break;
        }
    }

    Ok(RpcaResult {
        low_rank: to_ndarray(&l),
        sparse: to_ndarray(&s),
        iterations,
        residual,
        rank_estimate: rank,
        converged: residual <= params.tol,
        lambda,
    })
}
