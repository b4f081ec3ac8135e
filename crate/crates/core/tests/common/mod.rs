//! Reference implementations used as oracles by the integration tests and
//! the acceptance runner. Each is written directly from its definition and
//! shares no code with the library.

#![allow(dead_code)]

use std::path::PathBuf;

use agepress::classify::StressMatrix;
use agepress::indices::AdminCategory;
use nalgebra::{DMatrix, DVector};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/township")
}

/// The 27-village township table as a stress matrix, ordered by id.
pub fn township() -> StressMatrix {
    let text = std::fs::read_to_string(fixture_dir().join("villages.csv")).unwrap();
    let mut ids = Vec::new();
    let mut data = Vec::new();
    let mut admin = Vec::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        ids.push(f[0].to_string());
        admin.push(f[2].parse::<AdminCategory>().unwrap());
        data.push([
            f[3].parse().unwrap(),
            f[4].parse().unwrap(),
            f[5].parse().unwrap(),
            f[6].parse().unwrap(),
        ]);
    }
    StressMatrix::new(ids, data, admin).unwrap()
}

pub fn reference_clusters() -> Vec<usize> {
    let text = std::fs::read_to_string(fixture_dir().join("reference_clusters.csv")).unwrap();
    let mut rows: Vec<(String, usize)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (id, c) = l.split_once(',').unwrap();
            (id.to_string(), c.trim().parse().unwrap())
        })
        .collect();
    rows.sort();
    rows.into_iter().map(|(_, c)| c).collect()
}

// ---------------------------------------------------------------------------
// Quadrature

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Double-exponential (tanh-sinh) rule on [0, 1]. The integrand receives
/// both `s` and `1 - s`, each computed without cancellation, so endpoint
/// singularities of the form `s^a (1-s)^b` are handled.
pub fn tanh_sinh(f: impl Fn(f64, f64) -> f64) -> f64 {
    let h = 1.0 / 64.0;
    let tmax = 4.5;
    let m = (tmax / h) as i64;
    let mut total = 0.0;
    for k in -m..=m {
        let t = k as f64 * h;
        let z = std::f64::consts::PI * t.sinh();
        let s = logistic(z);
        let c = logistic(-z);
        let w = s * c * std::f64::consts::PI * t.cosh();
        if w == 0.0 || s == 0.0 || c == 0.0 {
            continue;
        }
        total += w * f(s, c);
    }
    total * h
}

/// Integral of `u^(a-1) (1-u)^(b-1)` over `[lo, hi] ⊂ [0, 1]`.
fn beta_kernel_integral(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    tanh_sinh(|s, c| {
        // u = lo + width·s, 1 - u = (1 - hi) + width·c
        let u = lo + width * s;
        let v = (1.0 - hi) + width * c;
        width * (u.ln() * (a - 1.0) + v.ln() * (b - 1.0)).exp()
    })
}

/// Upper tail of the F(d1, d2) distribution at `f`, as the ratio of two
/// numeric integrals of the unnormalized density after mapping `x` to
/// `u = d1 x / (d2 + d1 x)`.
pub fn f_tail_oracle(f: f64, d1: f64, d2: f64) -> f64 {
    let u0 = d1 * f / (d2 + d1 * f);
    let (a, b) = (d1 / 2.0, d2 / 2.0);
    let lower = beta_kernel_integral(a, b, 0.0, u0);
    let upper = beta_kernel_integral(a, b, u0, 1.0);
    upper / (lower + upper)
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_oracle(a: f64, b: f64, x: f64) -> f64 {
    let lower = beta_kernel_integral(a, b, 0.0, x);
    let upper = beta_kernel_integral(a, b, x, 1.0);
    lower / (lower + upper)
}

/// Two-sided Student t p-value through `t² ~ F(1, df)`.
pub fn t_two_tailed_oracle(t: f64, df: f64) -> f64 {
    f_tail_oracle(t * t, 1.0, df)
}

// ---------------------------------------------------------------------------
// Clustering

/// One merge of the brute-force UPGMA: the two merged node ids (smaller
/// first) and the height.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleMerge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
}

/// Average linkage by recomputing every cluster-pair mean from the leaves
/// at each step. Ties go to the lexicographically smallest id pair.
pub fn upgma_oracle(d: &[Vec<f64>]) -> Vec<OracleMerge> {
    let n = d.len();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut out = Vec::new();
    let mut next = n;
    while clusters.len() > 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for x in 0..clusters.len() {
            for y in x + 1..clusters.len() {
                let (ia, ma) = &clusters[x];
                let (ib, mb) = &clusters[y];
                let mut sum = 0.0;
                for &p in ma {
                    for &q in mb {
                        sum += d[p][q];
                    }
                }
                let h = sum / (ma.len() * mb.len()) as f64;
                let ids = ((*ia).min(*ib), (*ia).max(*ib));
                let take = match best {
                    None => true,
                    Some((bh, ba, bb, _, _)) => h < bh || (h == bh && ids < (ba, bb)),
                };
                if take {
                    best = Some((h, ids.0, ids.1, x, y));
                }
            }
        }
        let (h, a, b, x, y) = best.unwrap();
        let mut merged = clusters[x].1.clone();
        merged.extend(clusters[y].1.iter().copied());
        clusters.remove(y);
        clusters.remove(x);
        clusters.push((next, merged));
        next += 1;
        out.push(OracleMerge { a, b, height: h });
    }
    out
}

/// Per-point silhouette straight from the definition. `labels` may be any
/// integers; singletons score 0.
pub fn silhouette_oracle(d: &[Vec<f64>], labels: &[usize]) -> Vec<f64> {
    let n = d.len();
    let mut distinct: Vec<usize> = labels.to_vec();
    distinct.sort();
    distinct.dedup();
    (0..n)
        .map(|i| {
            let mean_to = |c: usize, skip_self: bool| {
                let mut s = 0.0;
                let mut m = 0usize;
                for j in 0..n {
                    if labels[j] == c {
                        s += d[i][j];
                        if !(skip_self && j == i) {
                            m += 1;
                        }
                    }
                }
                (s, m)
            };
            let (s_own, m_own) = mean_to(labels[i], true);
            if m_own == 0 {
                return 0.0;
            }
            let a = s_own / m_own as f64;
            let mut b = f64::INFINITY;
            for &c in &distinct {
                if c != labels[i] {
                    let (s, m) = mean_to(c, false);
                    b = b.min(s / m as f64);
                }
            }
            let m = a.max(b);
            if m == 0.0 {
                0.0
            } else {
                (b - a) / m
            }
        })
        .collect()
}

/// Adjusted Rand index by counting agreeing and disagreeing point pairs.
pub fn ari_oracle(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut ss, mut sd, mut ds, mut dd) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        for j in i + 1..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => ss += 1.0,
                (true, false) => sd += 1.0,
                (false, true) => ds += 1.0,
                (false, false) => dd += 1.0,
            }
        }
    }
    let denom = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd);
    if denom == 0.0 {
        return 1.0;
    }
    2.0 * (ss * dd - sd * ds) / denom
}

// ---------------------------------------------------------------------------
// Linear algebra

pub fn covariance(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = x.shape();
    let mut c = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in 0..p {
            let ma = x.column(a).sum() / n as f64;
            let mb = x.column(b).sum() / n as f64;
            let mut s = 0.0;
            for i in 0..n {
                s += (x[(i, a)] - ma) * (x[(i, b)] - mb);
            }
            c[(a, b)] = s / (n - 1) as f64;
        }
    }
    c
}

/// VIF as the diagonal of the inverse correlation matrix.
pub fn vif_oracle(x: &DMatrix<f64>) -> Vec<f64> {
    let c = covariance(x);
    let p = c.nrows();
    let r = DMatrix::from_fn(p, p, |i, j| c[(i, j)] / (c[(i, i)] * c[(j, j)]).sqrt());
    let inv = r.try_inverse().unwrap();
    (0..p).map(|i| inv[(i, i)]).collect()
}

/// Mahalanobis distances for two-column data with the covariance inverted
/// by the explicit 2×2 formula.
pub fn mahalanobis_2d_oracle(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let c = covariance(x);
    let det = c[(0, 0)] * c[(1, 1)] - c[(0, 1)] * c[(1, 0)];
    let inv = [
        [c[(1, 1)] / det, -c[(0, 1)] / det],
        [-c[(1, 0)] / det, c[(0, 0)] / det],
    ];
    let n = x.nrows();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let u = [x[(i, 0)] - x[(j, 0)], x[(i, 1)] - x[(j, 1)]];
            let q = u[0] * (inv[0][0] * u[0] + inv[0][1] * u[1])
                + u[1] * (inv[1][0] * u[0] + inv[1][1] * u[1]);
            d[i][j] = q.sqrt();
        }
    }
    d
}

/// Fisher direction `Sw⁻¹ (μ₁ − μ₀)` by LU solve, scaled to unit pooled
/// within-class variance.
pub fn lda_direction_oracle(x: &DMatrix<f64>, positive: &[bool]) -> DVector<f64> {
    let (n, p) = x.shape();
    let mean_of = |want: bool| {
        let rows: Vec<usize> = (0..n).filter(|&i| positive[i] == want).collect();
        DVector::from_fn(p, |j, _| {
            rows.iter().map(|&i| x[(i, j)]).sum::<f64>() / rows.len() as f64
        })
    };
    let (m1, m0) = (mean_of(true), mean_of(false));
    let mut sw = DMatrix::zeros(p, p);
    for i in 0..n {
        let m = if positive[i] { &m1 } else { &m0 };
        for a in 0..p {
            for b in 0..p {
                sw[(a, b)] += (x[(i, a)] - m[a]) * (x[(i, b)] - m[b]);
            }
        }
    }
    sw /= (n - 2) as f64;
    let w = sw.clone().lu().solve(&(m1 - m0)).unwrap();
    let var = (w.transpose() * &sw * &w)[(0, 0)];
    w / var.sqrt()
}

pub fn to_rows(d: &agepress::classify::DistanceMatrix) -> Vec<Vec<f64>> {
    (0..d.len()).map(|i| d.row(i).to_vec()).collect()
}
