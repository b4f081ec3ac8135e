//! Average-linkage (UPGMA) agglomerative clustering.

use serde::{Deserialize, Serialize};

use super::distance::DistanceMatrix;
use crate::error::{Error, Result};

/// One agglomeration step. Leaves are nodes `0..n`; the merge at step `s`
/// creates node `n + s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub node_a: usize,
    pub node_b: usize,
    pub height: f64,
    pub new_id: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkageTree {
    pub n: usize,
    pub merges: Vec<Merge>,
}

struct Active {
    node: usize,
    size: usize,
}

/// UPGMA over a distance matrix.
///
/// Inter-cluster linkage is kept as the sum of all leaf-pair distances, and
/// the height of a candidate pair is `sum / (size_a · size_b)`. Equal
/// heights are broken by the smallest `(node_a, node_b)` pair.
pub fn hclust_average(dist: &DistanceMatrix) -> Result<LinkageTree> {
    let n = dist.len();
    if n < 2 {
        return Err(Error::invalid(format!(
            "clustering needs at least 2 observations, got {n}"
        )));
    }
    // slot-indexed; a merged pair lives on in the lower slot
    let mut slots: Vec<Option<Active>> =
        (0..n).map(|i| Some(Active { node: i, size: 1 })).collect();
    let mut sums: Vec<f64> = (0..n * n).map(|k| dist.get(k / n, k % n)).collect();
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for i in 0..n {
            let Some(a) = &slots[i] else { continue };
            for j in i + 1..n {
                let Some(b) = &slots[j] else { continue };
                let h = sums[i * n + j] / (a.size * b.size) as f64;
                let ids = (a.node.min(b.node), a.node.max(b.node));
                let better = match best {
                    None => true,
                    Some((bh, bids, _, _)) => h < bh || (h == bh && ids < bids),
                };
                if better {
                    best = Some((h, ids, i, j));
                }
            }
        }
        let (height, (node_a, node_b), i, j) = best.expect("at least two active clusters");
        let size = slots[i].as_ref().unwrap().size + slots[j].as_ref().unwrap().size;
        for k in 0..n {
            if k != i && k != j && slots[k].is_some() {
                let s = sums[i * n + k] + sums[j * n + k];
                sums[i * n + k] = s;
                sums[k * n + i] = s;
            }
        }
        let new_id = n + step;
        slots[i] = Some(Active { node: new_id, size });
        slots[j] = None;
        merges.push(Merge {
            node_a,
            node_b,
            height,
            new_id,
            size,
        });
    }
    Ok(LinkageTree { n, merges })
}

/// Flat clustering with labels `1..=k`, numbered by each cluster's
/// smallest member index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub k: usize,
    pub labels: Vec<usize>,
}

impl ClusterAssignment {
    /// Canonicalizes arbitrary labels into `1..=k` by first appearance.
    pub fn from_labels<T: Eq + Clone>(raw: &[T]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::invalid("assignment has no observations"));
        }
        let mut seen: Vec<T> = Vec::new();
        let labels = raw
            .iter()
            .map(|l| match seen.iter().position(|s| s == l) {
                Some(p) => p + 1,
                None => {
                    seen.push(l.clone());
                    seen.len()
                }
            })
            .collect();
        Ok(Self {
            k: seen.len(),
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l - 1] += 1;
        }
        s
    }

    /// Indices of the members of cluster `label` (1-based).
    pub fn members(&self, label: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] == label)
            .collect()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Undoes the last `k − 1` merges.
pub fn cut_tree(tree: &LinkageTree, k: usize) -> Result<ClusterAssignment> {
    let n = tree.n;
    if k < 1 || k > n {
        return Err(Error::invalid(format!("k = {k} outside 1..={n}")));
    }
    let mut parent: Vec<usize> = (0..2 * n).collect();
    for m in &tree.merges[..n - k] {
        let a = find(&mut parent, m.node_a);
        let b = find(&mut parent, m.node_b);
        parent[a] = m.new_id;
        parent[b] = m.new_id;
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    ClusterAssignment::from_labels(&roots)
}
