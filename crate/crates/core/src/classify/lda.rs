//! Two-class Fisher discriminant over the administrative labels.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::distance::regularized_cholesky;
use super::matrix::StressMatrix;
use crate::error::{Error, Result};
use crate::indices::AdminCategory;

/// LD1 axis fitted to ADV vs SCV.
///
/// Coefficients are scaled so the pooled within-class variance of the
/// scores is 1 and offset so the mean score over all villages is 0. SCV
/// scores are positive on average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantModel {
    pub coefficients: Vec<f64>,
    pub offset: f64,
    pub positive_class: AdminCategory,
    pub row_ids: Vec<String>,
    pub labels: Vec<AdminCategory>,
    pub scores: Vec<f64>,
}

impl DiscriminantModel {
    pub fn score(&self, row: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .zip(row)
            .map(|(c, v)| c * v)
            .sum::<f64>()
            + self.offset
    }

    /// The same discriminant with coefficients, offset and scores
    /// multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Self {
        Self {
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
            offset: self.offset * factor,
            scores: self.scores.iter().map(|s| s * factor).collect(),
            ..self.clone()
        }
    }
}

/// Classification rule: negative scores are ADV, zero and above are SCV.
pub fn predict(score: f64) -> AdminCategory {
    if score < 0.0 {
        AdminCategory::Adv
    } else {
        AdminCategory::Scv
    }
}

pub fn lda_fit(matrix: &StressMatrix) -> Result<DiscriminantModel> {
    let x = matrix.to_dmatrix();
    let labels = matrix.admin_labels();
    let (n, p) = x.shape();
    let is_scv: Vec<bool> = labels.iter().map(|&l| l == AdminCategory::Scv).collect();
    let n_scv = is_scv.iter().filter(|&&b| b).count();
    let n_adv = n - n_scv;
    if n_scv == 0 || n_adv == 0 {
        return Err(Error::invalid(
            "discriminant analysis needs both ADV and SCV villages",
        ));
    }
    if n_scv < 2 || n_adv < 2 {
        return Err(Error::invalid(format!(
            "discriminant analysis needs at least 2 villages per class, got ADV {n_adv}, SCV {n_scv}"
        )));
    }

    let class_mean = |want: bool| -> DVector<f64> {
        let mut m = DVector::zeros(p);
        let mut count = 0.0;
        for i in (0..n).filter(|&i| is_scv[i] == want) {
            m += x.row(i).transpose();
            count += 1.0;
        }
        m / count
    };
    let mu_scv = class_mean(true);
    let mu_adv = class_mean(false);

    let mut sw = DMatrix::zeros(p, p);
    for (i, &scv) in is_scv.iter().enumerate() {
        let mu = if scv { &mu_scv } else { &mu_adv };
        let d = x.row(i).transpose() - mu;
        sw += &d * d.transpose();
    }
    sw /= (n - 2) as f64;

    let delta = &mu_scv - &mu_adv;
    let w = regularized_cholesky(&sw)?.solve(&delta);
    let within_var = (w.transpose() * &sw * &w)[(0, 0)];
    if !(within_var.is_finite() && within_var > 0.0) {
        return Err(Error::numerical(
            "class means coincide; no discriminant direction",
        ));
    }
    let w = w / within_var.sqrt();

    let grand = DVector::from_iterator(p, (0..p).map(|j| x.column(j).mean()));
    let offset = -w.dot(&grand);
    let scores: Vec<f64> = (0..n)
        .map(|i| x.row(i).transpose().dot(&w) + offset)
        .collect();
    Ok(DiscriminantModel {
        coefficients: w.iter().copied().collect(),
        offset,
        positive_class: AdminCategory::Scv,
        row_ids: matrix.row_ids().to_vec(),
        labels: labels.to_vec(),
        scores,
    })
}

/// One row of the discriminant evaluation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScoreSummary {
    pub class: AdminCategory,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaEvaluation {
    pub classes: Vec<ClassScoreSummary>,
    pub predicted: Vec<AdminCategory>,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

impl LdaEvaluation {
    pub fn class(&self, class: AdminCategory) -> Option<&ClassScoreSummary> {
        self.classes.iter().find(|c| c.class == class)
    }
}

/// Applies the sign rule to scores and tabulates per-class summaries.
pub fn classify_scores(scores: &[f64], truth: &[AdminCategory]) -> Result<LdaEvaluation> {
    if scores.len() != truth.len() {
        return Err(Error::invalid(format!(
            "{} scores for {} labels",
            scores.len(),
            truth.len()
        )));
    }
    let predicted: Vec<AdminCategory> = scores.iter().map(|&s| predict(s)).collect();
    let mut classes = Vec::new();
    for class in AdminCategory::ALL {
        let idx: Vec<usize> = (0..truth.len()).filter(|&i| truth[i] == class).collect();
        if idx.is_empty() {
            continue;
        }
        let vals: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
        let n = vals.len();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let correct = idx.iter().filter(|&&i| predicted[i] == class).count();
        classes.push(ClassScoreSummary {
            class,
            n,
            mean,
            sd,
            min: vals.iter().copied().fold(f64::INFINITY, f64::min),
            max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            correct,
            accuracy: correct as f64 / n as f64,
        });
    }
    let correct = classes.iter().map(|c| c.correct).sum();
    let total = truth.len();
    Ok(LdaEvaluation {
        classes,
        predicted,
        correct,
        total,
        accuracy: if total == 0 {
            0.0
        } else {
            correct as f64 / total as f64
        },
    })
}

pub fn lda_classify(model: &DiscriminantModel) -> LdaEvaluation {
    classify_scores(&model.scores, &model.labels).expect("model scores match its labels")
}
