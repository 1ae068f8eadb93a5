//! Least squares, exactly identified IV and the cluster sandwich.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative threshold on the QR diagonal below which a column is treated as
/// linearly dependent on the ones before it.
const RANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct LinearFit {
    /// Indices of the input columns that were estimated.
    pub kept: Vec<usize>,
    /// Indices dropped for collinearity.
    pub dropped: Vec<usize>,
    pub coefficients: DVector<f64>,
    pub residuals: DVector<f64>,
    /// `(X'X)^{-1}` for OLS, `(Z'X)^{-1}` for IV, over the kept columns.
    pub bread: DMatrix<f64>,
}

/// Columns of `x` that are not (numerically) in the span of earlier columns.
pub fn independent_columns(x: &DMatrix<f64>) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::with_capacity(x.ncols());
    for j in 0..x.ncols() {
        let norm = x.column(j).norm();
        if norm == 0.0 {
            continue;
        }
        let mut candidate = kept.clone();
        candidate.push(j);
        let sub = x.select_columns(&candidate);
        let r = sub.qr().r();
        let last = candidate.len() - 1;
        if r[(last, last)].abs() > RANK_TOLERANCE * norm {
            kept.push(j);
        }
    }
    kept
}

fn upper_triangular_inverse(r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = r.ncols();
    r.solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::RankDeficient(vec!["<singular R>".into()]))
}

/// Least squares through a QR decomposition of `x`; collinear columns are
/// dropped and reported rather than failing the fit.
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<LinearFit> {
    let kept = independent_columns(x);
    let dropped: Vec<usize> = (0..x.ncols()).filter(|j| !kept.contains(j)).collect();
    let xk = x.select_columns(&kept);
    if kept.is_empty() {
        return Ok(LinearFit {
            kept,
            dropped,
            coefficients: DVector::zeros(0),
            residuals: y.clone(),
            bread: DMatrix::zeros(0, 0),
        });
    }
    let qr = xk.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let qty = q.transpose() * y;
    let coefficients = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankDeficient(vec!["<singular R>".into()]))?;
    let residuals = y - &xk * &coefficients;
    let r_inv = upper_triangular_inverse(&r)?;
    let bread = &r_inv * r_inv.transpose();
    Ok(LinearFit { kept, dropped, coefficients, residuals, bread })
}

/// Exactly identified IV: `b = (Z'X)^{-1} Z'y`. Columns are kept or dropped
/// according to the instrument matrix, and the same columns of `x` are used.
pub fn iv(x: &DMatrix<f64>, z: &DMatrix<f64>, y: &DVector<f64>) -> Result<LinearFit> {
    assert_eq!(x.shape(), z.shape());
    let kept = independent_columns(z);
    let dropped: Vec<usize> = (0..x.ncols()).filter(|j| !kept.contains(j)).collect();
    let (xk, zk) = (x.select_columns(&kept), z.select_columns(&kept));
    let zx = zk.transpose() * &xk;
    let bread = zx.try_inverse().ok_or_else(|| Error::RankDeficient(vec!["Z'X is singular".into()]))?;
    let coefficients = &bread * (zk.transpose() * y);
    let residuals = y - &xk * &coefficients;
    Ok(LinearFit { kept, dropped, coefficients, residuals, bread })
}

/// Dense cluster index per observation plus the number of clusters.
pub fn dense_clusters<K: std::hash::Hash + Eq + Clone>(keys: &[K]) -> (Vec<usize>, usize) {
    let mut map: HashMap<K, usize> = HashMap::new();
    let ids = keys
        .iter()
        .map(|k| {
            let n = map.len();
            *map.entry(k.clone()).or_insert(n)
        })
        .collect();
    (ids, map.len())
}

/// `sum_g (W_g' u_g)(W_g' u_g)'` over clusters.
pub fn cluster_meat(scores: &DMatrix<f64>, residuals: &DVector<f64>, clusters: &[usize], n_clusters: usize) -> DMatrix<f64> {
    let k = scores.ncols();
    let mut sums = DMatrix::<f64>::zeros(n_clusters, k);
    for (i, &g) in clusters.iter().enumerate() {
        let u = residuals[i];
        for j in 0..k {
            sums[(g, j)] += scores[(i, j)] * u;
        }
    }
    sums.transpose() * sums
}

/// Degrees-of-freedom inputs to the CR1 correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dof {
    /// Observations counted for inference (singletons excluded).
    pub n: usize,
    /// Estimated slopes plus fixed effects not nested in the clusters.
    pub k: usize,
}

impl Dof {
    /// `G/(G-1) * (N-1)/(N-K)`.
    pub fn cr1_factor(&self, n_clusters: usize) -> f64 {
        let g = n_clusters as f64;
        let n = self.n as f64;
        let k = self.k as f64;
        let small_n = if self.n > self.k { (n - 1.0) / (n - k) } else { 1.0 };
        g / (g - 1.0) * small_n
    }
}

/// CR1 cluster-robust covariance `c * B M B'`, where `M` is the cluster meat
/// of `scores` (`X` for OLS, `Z` for IV) and `B` the bread.
pub fn cluster_robust_cov(
    scores: &DMatrix<f64>,
    residuals: &DVector<f64>,
    bread: &DMatrix<f64>,
    clusters: &[usize],
    dof: Dof,
) -> Result<DMatrix<f64>> {
    let n_clusters = clusters.iter().copied().max().map_or(0, |m| m + 1);
    let distinct = {
        let mut seen = vec![false; n_clusters];
        clusters.iter().for_each(|&g| seen[g] = true);
        seen.iter().filter(|&&s| s).count()
    };
    if distinct < 2 {
        return Err(Error::TooFewClusters(distinct));
    }
    let meat = cluster_meat(scores, residuals, clusters, n_clusters);
    let v = bread * meat * bread.transpose() * dof.cr1_factor(distinct);
    Ok((&v + v.transpose()) * 0.5)
}
