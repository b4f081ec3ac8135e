//! Silhouette and Calinski–Harabasz indices and the k-scan.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::distance::{standardize_columns, whiten, DistanceMatrix};
use super::hclust::{cut_tree, hclust_average, ClusterAssignment, LinkageTree};
use super::matrix::{StressMatrix, INDICATORS};
use crate::error::{Error, Result};
use crate::exec::Execution;

pub const DEFAULT_KMIN: usize = 2;
pub const DEFAULT_KMAX: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Silhouette {
    pub mean: f64,
    pub per_point: Vec<f64>,
}

fn check_assignment(n: usize, assignment: &ClusterAssignment) -> Result<()> {
    if assignment.len() != n {
        return Err(Error::invalid(format!(
            "assignment has {} labels for {n} observations",
            assignment.len()
        )));
    }
    if assignment
        .labels
        .iter()
        .any(|&l| l == 0 || l > assignment.k)
        || assignment.sizes().contains(&0)
    {
        return Err(Error::invalid("assignment labels must cover 1..=k"));
    }
    Ok(())
}

/// Silhouette widths. Members of singleton clusters score 0.
pub fn silhouette(dist: &DistanceMatrix, assignment: &ClusterAssignment) -> Result<Silhouette> {
    let n = dist.len();
    check_assignment(n, assignment)?;
    let k = assignment.k;
    if k < 2 {
        return Err(Error::invalid(format!("silhouette needs k >= 2, got {k}")));
    }
    let sizes = assignment.sizes();
    let labels = &assignment.labels;
    let per_point: Vec<f64> = (0..n)
        .map(|i| {
            let own = labels[i] - 1;
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for (j, d) in dist.row(i).iter().enumerate() {
                sums[labels[j] - 1] += d;
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            if m == 0.0 {
                0.0
            } else {
                (b - a) / m
            }
        })
        .collect();
    let mean = per_point.iter().sum::<f64>() / n as f64;
    Ok(Silhouette { mean, per_point })
}

/// Between / within dispersion ratio on the rows of `points`.
pub fn calinski_harabasz(points: &DMatrix<f64>, assignment: &ClusterAssignment) -> Result<f64> {
    let (n, p) = points.shape();
    check_assignment(n, assignment)?;
    let k = assignment.k;
    if k < 2 || k >= n {
        return Err(Error::invalid(format!(
            "Calinski-Harabasz needs 2 <= k < n, got k = {k}, n = {n}"
        )));
    }
    let grand = DVector::from_iterator(p, (0..p).map(|j| points.column(j).mean()));
    let mut centroids = vec![DVector::<f64>::zeros(p); k];
    let sizes = assignment.sizes();
    for (i, &l) in assignment.labels.iter().enumerate() {
        centroids[l - 1] += points.row(i).transpose();
    }
    for (c, &s) in centroids.iter_mut().zip(&sizes) {
        *c /= s as f64;
    }
    let ss_between: f64 = centroids
        .iter()
        .zip(&sizes)
        .map(|(c, &s)| s as f64 * (c - &grand).norm_squared())
        .sum();
    let ss_within: f64 = assignment
        .labels
        .iter()
        .enumerate()
        .map(|(i, &l)| (points.row(i).transpose() - &centroids[l - 1]).norm_squared())
        .sum();
    if ss_within == 0.0 {
        return Err(Error::numerical("zero within-cluster dispersion"));
    }
    Ok((ss_between / (k - 1) as f64) / (ss_within / (n - k) as f64))
}

/// Whitened coordinates, their distance matrix and the UPGMA tree.
#[derive(Debug, Clone)]
pub struct Clustering {
    pub points: DMatrix<f64>,
    pub distances: DistanceMatrix,
    pub tree: LinkageTree,
}

impl Clustering {
    /// Clusters rows by Euclidean distance in the given coordinates.
    pub fn from_points(points: DMatrix<f64>) -> Result<Self> {
        let distances = DistanceMatrix::euclidean(&points)?;
        let tree = hclust_average(&distances)?;
        Ok(Self {
            points,
            distances,
            tree,
        })
    }

    /// Clusters rows by Mahalanobis distance.
    pub fn mahalanobis(data: &DMatrix<f64>) -> Result<Self> {
        Self::from_points(whiten(data)?)
    }

    /// Standardizes the indicators, then clusters by Mahalanobis distance.
    pub fn from_stress(matrix: &StressMatrix) -> Result<Self> {
        Self::mahalanobis(&standardize_columns(&matrix.to_dmatrix(), &INDICATORS)?)
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn cut(&self, k: usize) -> Result<ClusterAssignment> {
        cut_tree(&self.tree, k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityRow {
    pub k: usize,
    pub silhouette: f64,
    pub calinski_harabasz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub rows: Vec<ValidityRow>,
    /// Smallest k attaining the maximum mean silhouette.
    pub best_silhouette_k: usize,
    /// Smallest k attaining the maximum Calinski–Harabasz score.
    pub best_calinski_harabasz_k: usize,
}

fn argmax_k(rows: &[ValidityRow], key: impl Fn(&ValidityRow) -> f64) -> usize {
    let mut best = &rows[0];
    for r in &rows[1..] {
        if key(r) > key(best) {
            best = r;
        }
    }
    best.k
}

/// Scores every cut of one tree for `k` in `kmin..=kmax`.
pub fn scan_k_with(
    clustering: &Clustering,
    kmin: usize,
    kmax: usize,
    exec: Execution,
) -> Result<ValidityReport> {
    let n = clustering.n();
    if kmin < 2 || kmin > kmax {
        return Err(Error::invalid(format!(
            "k range {kmin}..{kmax} must satisfy 2 <= kmin <= kmax"
        )));
    }
    if kmax >= n {
        return Err(Error::invalid(format!(
            "k_range exceeds n-1: kmax = {kmax} with n = {n}"
        )));
    }
    let rows = exec.try_map_range(kmax - kmin + 1, |i| {
        let k = kmin + i;
        let a = clustering.cut(k)?;
        Ok::<_, Error>(ValidityRow {
            k,
            silhouette: silhouette(&clustering.distances, &a)?.mean,
            calinski_harabasz: calinski_harabasz(&clustering.points, &a)?,
        })
    })?;
    Ok(ValidityReport {
        best_silhouette_k: argmax_k(&rows, |r| r.silhouette),
        best_calinski_harabasz_k: argmax_k(&rows, |r| r.calinski_harabasz),
        rows,
    })
}

pub fn scan_k(matrix: &StressMatrix, kmin: usize, kmax: usize) -> Result<ValidityReport> {
    scan_k_with(
        &Clustering::from_stress(matrix)?,
        kmin,
        kmax,
        Execution::default(),
    )
}
