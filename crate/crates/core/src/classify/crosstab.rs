//! Administrative × spatial contingency tables and label agreement.

use serde::{Deserialize, Serialize};

use super::hclust::ClusterAssignment;
use crate::error::{Error, Result};
use crate::indices::AdminCategory;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossTab {
    pub k: usize,
    /// `counts[a][c]` for admin class `AdminCategory::ALL[a]` and cluster
    /// label `c + 1`.
    pub counts: [Vec<usize>; 2],
    pub row_totals: [usize; 2],
    pub column_totals: Vec<usize>,
    pub n: usize,
}

impl CrossTab {
    pub fn count(&self, class: AdminCategory, cluster: usize) -> usize {
        let row = AdminCategory::ALL.iter().position(|&c| c == class).unwrap();
        self.counts[row][cluster - 1]
    }
}

pub fn cross_tab(admin: &[AdminCategory], assignment: &ClusterAssignment) -> Result<CrossTab> {
    cross_tab_labels(admin, &assignment.labels, assignment.k)
}

/// Cross-tabulation against labels in `1..=k` that need not be canonical
/// (e.g. after alignment to a reference numbering).
pub fn cross_tab_labels(admin: &[AdminCategory], labels: &[usize], k: usize) -> Result<CrossTab> {
    if admin.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} admin labels for {} cluster labels",
            admin.len(),
            labels.len()
        )));
    }
    let mut counts = [vec![0; k], vec![0; k]];
    for (&a, &l) in admin.iter().zip(labels) {
        if l == 0 || l > k {
            return Err(Error::invalid(format!("cluster label {l} outside 1..={k}")));
        }
        let row = if a == AdminCategory::Adv { 0 } else { 1 };
        counts[row][l - 1] += 1;
    }
    let row_totals = [counts[0].iter().sum(), counts[1].iter().sum()];
    let column_totals = (0..k).map(|c| counts[0][c] + counts[1][c]).collect();
    Ok(CrossTab {
        k,
        counts,
        row_totals,
        column_totals,
        n: labels.len(),
    })
}

fn contingency(a: &[usize], b: &[usize]) -> (Vec<Vec<usize>>, usize, usize) {
    let ka = a.iter().copied().max().unwrap_or(0);
    let kb = b.iter().copied().max().unwrap_or(0);
    let mut t = vec![vec![0; kb + 1]; ka + 1];
    for (&x, &y) in a.iter().zip(b) {
        t[x][y] += 1;
    }
    (t, ka, kb)
}

/// Mapping from one labeling's clusters onto a reference numbering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelAlignment {
    /// `mapping[c - 1]` is the aligned label for cluster `c`.
    pub mapping: Vec<usize>,
    /// Observations whose aligned label equals the reference label.
    pub agreement: usize,
}

impl LabelAlignment {
    pub fn apply(&self, assignment: &ClusterAssignment) -> Vec<usize> {
        assignment
            .labels
            .iter()
            .map(|&l| self.mapping[l - 1])
            .collect()
    }
}

const EXHAUSTIVE_LIMIT: usize = 8;

/// Renames clusters to best overlap a reference labeling (labels ≥ 1).
/// Distinct clusters receive distinct labels; clusters beyond the
/// reference's label count get fresh labels above it.
pub fn align_labels(assignment: &ClusterAssignment, reference: &[usize]) -> Result<LabelAlignment> {
    if reference.len() != assignment.len() {
        return Err(Error::invalid(format!(
            "reference has {} labels for {} observations",
            reference.len(),
            assignment.len()
        )));
    }
    if reference.contains(&0) {
        return Err(Error::invalid("reference cluster labels start at 1"));
    }
    let (table, k, m) = contingency(&assignment.labels, reference);
    let k = k.max(assignment.k);
    let targets = k.max(m);
    let overlap = |c: usize, t: usize| -> usize {
        if c < table.len() && t < table[c].len() {
            table[c][t]
        } else {
            0
        }
    };

    let mapping = if targets <= EXHAUSTIVE_LIMIT {
        // depth-first over injective maps; first maximum in lexicographic
        // order wins
        let mut best: (usize, Vec<usize>) = (0, Vec::new());
        let mut current = Vec::with_capacity(k);
        let mut used = vec![false; targets + 1];
        #[allow(clippy::too_many_arguments)]
        fn search(
            c: usize,
            k: usize,
            targets: usize,
            score: usize,
            current: &mut Vec<usize>,
            used: &mut [bool],
            best: &mut (usize, Vec<usize>),
            overlap: &dyn Fn(usize, usize) -> usize,
        ) {
            if c > k {
                if best.1.is_empty() || score > best.0 {
                    *best = (score, current.clone());
                }
                return;
            }
            for t in 1..=targets {
                if !used[t] {
                    used[t] = true;
                    current.push(t);
                    search(
                        c + 1,
                        k,
                        targets,
                        score + overlap(c, t),
                        current,
                        used,
                        best,
                        overlap,
                    );
                    current.pop();
                    used[t] = false;
                }
            }
        }
        search(
            1,
            k,
            targets,
            0,
            &mut current,
            &mut used,
            &mut best,
            &overlap,
        );
        best.1
    } else {
        let mut cells: Vec<(usize, usize, usize)> = (1..=k)
            .flat_map(|c| (1..=targets).map(move |t| (c, t)))
            .map(|(c, t)| (overlap(c, t), c, t))
            .collect();
        cells.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut mapping = vec![0; k];
        let mut used = vec![false; targets + 1];
        for (_, c, t) in cells {
            if mapping[c - 1] == 0 && !used[t] {
                mapping[c - 1] = t;
                used[t] = true;
            }
        }
        mapping
    };
    let agreement = (1..=k).map(|c| overlap(c, mapping[c - 1])).sum();
    Ok(LabelAlignment { mapping, agreement })
}

fn choose2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index between two labelings (labels may be any
/// non-negative integers). Returns 1 when both labelings are trivial in
/// the same way.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "labelings have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (table, _, _) = contingency(a, b);
    let index: f64 = table.iter().flatten().map(|&c| choose2(c)).sum();
    let rows: f64 = table.iter().map(|r| choose2(r.iter().sum())).sum();
    let cols: f64 = (0..table.first().map_or(0, |r| r.len()))
        .map(|j| choose2(table.iter().map(|r| r[j]).sum()))
        .sum();
    let total = choose2(a.len());
    let expected = if total == 0.0 {
        0.0
    } else {
        rows * cols / total
    };
    let max = (rows + cols) / 2.0;
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}
