//! Pearson correlation with two-tailed p-values, and variance inflation
//! factors from per-column least-squares regressions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::special::t_two_tailed;
use super::ALPHA;
use crate::classify::{StressMatrix, INDICATORS};
use crate::error::{Error, Result};

/// `1 − R²` below this is treated as exact collinearity (VIF = ∞).
pub const COLLINEARITY_TOLERANCE: f64 = 1e-10;

fn centered_ss(v: &[f64]) -> (f64, f64) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (mean, v.iter().map(|x| (x - mean).powi(2)).sum())
}

/// Product-moment correlation coefficient.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "correlation needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::invalid(format!(
            "correlation needs at least 3 observations, got {}",
            x.len()
        )));
    }
    let (mx, sxx) = centered_ss(x);
    let (my, syy) = centered_ss(y);
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance("constant input to pearson_r".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Two-tailed p-value of a sample correlation `r` over `n` pairs.
pub fn pearson_p(r: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::invalid(format!(
            "correlation p-value needs n >= 3, got {n}"
        )));
    }
    if !(-1.0..=1.0).contains(&r) {
        return Err(Error::invalid(format!("correlation {r} outside [-1, 1]")));
    }
    if r.abs() == 1.0 {
        return Ok(0.0);
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    Ok(t_two_tailed(t, df))
}

/// Solves `A x = b` for symmetric positive semidefinite `A` through an
/// eigen pseudo-inverse, so rank-deficient systems still give the
/// minimum-norm least-squares solution.
fn solve_psd(a: DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let eig = SymmetricEigen::new(a);
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = max * 1e-12 * eig.eigenvalues.len() as f64;
    let qtb = eig.eigenvectors.transpose() * b;
    let scaled = DVector::from_iterator(
        qtb.len(),
        qtb.iter()
            .zip(eig.eigenvalues.iter())
            .map(|(v, &l)| if l > cutoff { v / l } else { 0.0 }),
    );
    eig.eigenvectors * scaled
}

/// VIF of every column of an `n × p` matrix. Column `j` is regressed (with
/// intercept) on the remaining columns through the normal equations.
/// Exactly collinear columns report `f64::INFINITY`.
pub fn vif_columns(data: &DMatrix<f64>, names: &[&str]) -> Result<Vec<f64>> {
    let (n, p) = data.shape();
    if names.len() != p {
        return Err(Error::invalid(format!(
            "{} names for {p} columns",
            names.len()
        )));
    }
    if p < 2 {
        return Err(Error::invalid("VIF needs at least 2 columns"));
    }
    if n <= p {
        return Err(Error::invalid(format!(
            "VIF needs more rows ({n}) than columns ({p})"
        )));
    }
    let mut out = Vec::with_capacity(p);
    for (j, name) in names.iter().enumerate() {
        let y = data.column(j).into_owned();
        let mean = y.mean();
        let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
        if sst == 0.0 {
            return Err(Error::ZeroVariance(name.to_string()));
        }
        let mut x = DMatrix::from_element(n, p, 1.0);
        for (col, k) in (1..).zip((0..p).filter(|&k| k != j)) {
            x.set_column(col, &data.column(k));
        }
        let beta = solve_psd(x.transpose() * &x, &(x.transpose() * &y));
        let resid = &y - &x * beta;
        let unexplained = resid.norm_squared() / sst;
        out.push(if unexplained < COLLINEARITY_TOLERANCE {
            f64::INFINITY
        } else {
            1.0 / unexplained.min(1.0)
        });
    }
    Ok(out)
}

/// VIF for the four stress indicators.
pub fn vif(matrix: &StressMatrix) -> Result<Vec<f64>> {
    vif_columns(&matrix.to_dmatrix(), &INDICATORS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedPair {
    pub a: String,
    pub b: String,
    pub r: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub columns: Vec<String>,
    pub r_matrix: Vec<Vec<f64>>,
    pub p_matrix: Vec<Vec<f64>>,
    pub vif: Vec<f64>,
    /// Pairs with p < 0.05, in column order.
    pub flagged: Vec<FlaggedPair>,
}

impl CorrelationReport {
    pub fn r(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.columns.iter().position(|c| c == a)?;
        let j = self.columns.iter().position(|c| c == b)?;
        Some(self.r_matrix[i][j])
    }

    pub fn p(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.columns.iter().position(|c| c == a)?;
        let j = self.columns.iter().position(|c| c == b)?;
        Some(self.p_matrix[i][j])
    }
}

pub fn correlation_report(matrix: &StressMatrix) -> Result<CorrelationReport> {
    let n = matrix.nrows();
    if n < 3 {
        return Err(Error::invalid(format!(
            "correlation report needs at least 3 villages, got {n}"
        )));
    }
    let cols: Vec<Vec<f64>> = (0..INDICATORS.len()).map(|j| matrix.column(j)).collect();
    for (j, c) in cols.iter().enumerate() {
        if centered_ss(c).1 == 0.0 {
            return Err(Error::ZeroVariance(INDICATORS[j].to_string()));
        }
    }
    let p = cols.len();
    let mut r_matrix = vec![vec![1.0; p]; p];
    let mut p_matrix = vec![vec![0.0; p]; p];
    let mut flagged = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            let r = pearson_r(&cols[i], &cols[j])?;
            let pv = pearson_p(r, n)?;
            r_matrix[i][j] = r;
            r_matrix[j][i] = r;
            p_matrix[i][j] = pv;
            p_matrix[j][i] = pv;
            if pv < ALPHA {
                flagged.push(FlaggedPair {
                    a: INDICATORS[i].to_string(),
                    b: INDICATORS[j].to_string(),
                    r,
                    p: pv,
                });
            }
        }
    }
    Ok(CorrelationReport {
        columns: INDICATORS.iter().map(|s| s.to_string()).collect(),
        r_matrix,
        p_matrix,
        vif: vif(matrix)?,
        flagged,
    })
}
