//! Standardization, covariance whitening and distance matrices.

use nalgebra::{Cholesky, DMatrix, Dyn};

use super::matrix::{StressMatrix, INDICATORS};
use crate::error::{Error, Result};

/// Ridge added to a covariance diagonal (times trace / p) when its
/// Cholesky factorization fails.
pub const COVARIANCE_RIDGE: f64 = 1e-8;

/// Column z-scores with the sample (n − 1) standard deviation.
pub fn standardize_columns(data: &DMatrix<f64>, names: &[&str]) -> Result<DMatrix<f64>> {
    let n = data.nrows();
    if n < 2 {
        return Err(Error::invalid("standardizing needs at least 2 rows"));
    }
    let mut out = data.clone();
    for j in 0..data.ncols() {
        let col = data.column(j);
        let mean = col.mean();
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        if var == 0.0 {
            let name = names.get(j).copied().unwrap_or("column");
            return Err(Error::ZeroVariance(name.to_string()));
        }
        let sd = var.sqrt();
        for i in 0..n {
            out[(i, j)] = (data[(i, j)] - mean) / sd;
        }
    }
    Ok(out)
}

/// Z-scores every indicator column.
pub fn standardize(matrix: &StressMatrix) -> Result<StressMatrix> {
    let z = standardize_columns(&matrix.to_dmatrix(), &INDICATORS)?;
    matrix.with_dmatrix(&z)
}

/// Sample covariance (n − 1 denominator) of the columns.
pub fn sample_covariance(data: &DMatrix<f64>) -> DMatrix<f64> {
    let n = data.nrows();
    let centered = center(data);
    centered.transpose() * &centered / (n as f64 - 1.0)
}

fn center(data: &DMatrix<f64>) -> DMatrix<f64> {
    let mut c = data.clone();
    for j in 0..c.ncols() {
        let mean = c.column(j).mean();
        c.column_mut(j).add_scalar_mut(-mean);
    }
    c
}

/// Cholesky factor of a covariance, retrying once with a small ridge.
pub(crate) fn regularized_cholesky(cov: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("covariance has non-finite entries"));
    }
    if let Some(ch) = Cholesky::new(cov.clone()) {
        return Ok(ch);
    }
    let p = cov.nrows() as f64;
    let trace = cov.trace();
    if trace <= 0.0 {
        return Err(Error::numerical("covariance has zero trace"));
    }
    let mut reg = cov.clone();
    for i in 0..cov.nrows() {
        reg[(i, i)] += COVARIANCE_RIDGE * trace / p;
    }
    Cholesky::new(reg)
        .ok_or_else(|| Error::numerical("covariance is rank-deficient beyond regularization"))
}

/// Maps rows into coordinates whose sample covariance is the identity, so
/// Euclidean distances there are Mahalanobis distances in the original
/// space.
pub fn whiten(data: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if data.nrows() < 2 {
        return Err(Error::invalid("whitening needs at least 2 rows"));
    }
    let centered = center(data);
    let cov = centered.transpose() * &centered / (data.nrows() as f64 - 1.0);
    let l = regularized_cholesky(&cov)?.l();
    // Z = Xc L^-T, i.e. solve L Zᵀ = Xcᵀ
    let zt = l
        .solve_lower_triangular(&centered.transpose())
        .ok_or_else(|| Error::numerical("singular Cholesky factor"))?;
    Ok(zt.transpose())
}

/// Dense symmetric n × n distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates symmetry, a zero diagonal and non-negative finite entries.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::invalid(format!(
                "distance matrix needs {} values, got {}",
                n * n,
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::invalid(format!("distance d({i},{i}) is not zero")));
            }
            for j in i + 1..n {
                let d = values[i * n + j];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::invalid(format!("distance d({i},{j}) = {d}")));
                }
                if d != values[j * n + i] {
                    return Err(Error::invalid(format!(
                        "distance d({i},{j}) is not symmetric"
                    )));
                }
            }
        }
        Ok(Self { n, values })
    }

    /// Builds a matrix from `f(i, j)` evaluated for `i < j`.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j);
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Self::new(n, values)
    }

    /// Euclidean distances between the rows of `points`.
    pub fn euclidean(points: &DMatrix<f64>) -> Result<Self> {
        Self::from_fn(points.nrows(), |i, j| {
            (points.row(i) - points.row(j)).norm()
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

/// Mahalanobis distances between the rows of an arbitrary data matrix.
pub fn mahalanobis_distances(data: &DMatrix<f64>) -> Result<DistanceMatrix> {
    DistanceMatrix::euclidean(&whiten(data)?)
}

/// Pairwise Mahalanobis distances between villages, computed on the
/// standardized indicators.
pub fn mahalanobis_matrix(matrix: &StressMatrix) -> Result<DistanceMatrix> {
    let z = standardize_columns(&matrix.to_dmatrix(), &INDICATORS)?;
    mahalanobis_distances(&z)
}
