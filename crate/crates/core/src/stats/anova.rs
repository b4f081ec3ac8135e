//! One-way ANOVA from raw samples or from group summaries (n, mean, sd).

use serde::{Deserialize, Serialize};

use super::special::{f_tail, t_critical_two_tailed};
use crate::error::{Error, Result};

/// Group size, mean and sample (n − 1) standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryGroup {
    pub label: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

impl SummaryGroup {
    pub fn new(label: impl Into<String>, n: usize, mean: f64, sd: f64) -> Self {
        Self {
            label: label.into(),
            n,
            mean,
            sd,
        }
    }

    /// Summarizes a raw sample. A single observation gets sd 0.
    pub fn from_sample(label: impl Into<String>, values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("cannot summarize an empty group"));
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Ok(Self::new(label, n, mean, sd))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    /// `f64::INFINITY` when groups differ but have no within-group spread.
    pub f: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p: f64,
    pub ss_between: f64,
    pub ss_within: f64,
}

fn finish(ss_between: f64, ss_within: f64, k: usize, total: usize) -> Result<AnovaResult> {
    let df_between = k - 1;
    let df_within = total - k;
    let (f, p) = if ss_within == 0.0 {
        if ss_between == 0.0 {
            return Err(Error::ZeroVariance(
                "zero within and between variance".to_string(),
            ));
        }
        (f64::INFINITY, 0.0)
    } else {
        let f = (ss_between / df_between as f64) / (ss_within / df_within as f64);
        (f, f_tail(f, df_between as f64, df_within as f64))
    };
    Ok(AnovaResult {
        f,
        df_between,
        df_within,
        p,
        ss_between,
        ss_within,
    })
}

fn check_counts(sizes: impl Iterator<Item = usize>) -> Result<(usize, usize)> {
    let mut k = 0;
    let mut total = 0;
    for n in sizes {
        if n < 1 {
            return Err(Error::invalid(format!("ANOVA group {k} is empty")));
        }
        k += 1;
        total += n;
    }
    if k < 2 {
        return Err(Error::invalid(format!(
            "ANOVA needs at least 2 groups, got {k}"
        )));
    }
    if total <= k {
        return Err(Error::invalid(format!(
            "ANOVA needs more observations ({total}) than groups ({k})"
        )));
    }
    Ok((k, total))
}

/// One-way ANOVA over raw samples.
pub fn anova_oneway(groups: &[&[f64]]) -> Result<AnovaResult> {
    let (k, total) = check_counts(groups.iter().map(|g| g.len()))?;
    if groups.iter().flat_map(|g| g.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("ANOVA input contains non-finite values"));
    }
    let means: Vec<f64> = groups
        .iter()
        .map(|g| g.iter().sum::<f64>() / g.len() as f64)
        .collect();
    let grand = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / total as f64;
    let ss_between = groups
        .iter()
        .zip(&means)
        .map(|(g, m)| g.len() as f64 * (m - grand).powi(2))
        .sum();
    let ss_within = groups
        .iter()
        .zip(&means)
        .map(|(g, m)| g.iter().map(|v| (v - m).powi(2)).sum::<f64>())
        .sum();
    finish(ss_between, ss_within, k, total)
}

/// One-way ANOVA reconstructed from group n / mean / sd:
/// SS_between = Σ nᵢ(meanᵢ − grand)², SS_within = Σ (nᵢ − 1)·sdᵢ².
pub fn anova_from_summary(groups: &[SummaryGroup]) -> Result<AnovaResult> {
    let (k, total) = check_counts(groups.iter().map(|g| g.n))?;
    for g in groups {
        if !g.mean.is_finite() || !g.sd.is_finite() || g.sd < 0.0 {
            return Err(Error::invalid(format!(
                "group {} has invalid mean {} / sd {}",
                g.label, g.mean, g.sd
            )));
        }
    }
    let grand = groups.iter().map(|g| g.n as f64 * g.mean).sum::<f64>() / total as f64;
    let ss_between = groups
        .iter()
        .map(|g| g.n as f64 * (g.mean - grand).powi(2))
        .sum();
    let ss_within = groups.iter().map(|g| (g.n - 1) as f64 * g.sd * g.sd).sum();
    finish(ss_between, ss_within, k, total)
}

fn pooled_variance(a: &SummaryGroup, b: &SummaryGroup) -> Result<(f64, usize)> {
    if a.n < 1 || b.n < 1 || a.n + b.n < 3 {
        return Err(Error::invalid("pooled variance needs n_a + n_b >= 3"));
    }
    let df = a.n + b.n - 2;
    let var = ((a.n - 1) as f64 * a.sd * a.sd + (b.n - 1) as f64 * b.sd * b.sd) / df as f64;
    Ok((var, df))
}

/// Pooled-variance two-sample t statistic for `a − b`.
pub fn pooled_t(a: &SummaryGroup, b: &SummaryGroup) -> Result<f64> {
    let (var, _) = pooled_variance(a, b)?;
    let se = (var * (1.0 / a.n as f64 + 1.0 / b.n as f64)).sqrt();
    Ok((a.mean - b.mean) / se)
}

/// Pooled-variance confidence interval for `a.mean − b.mean` at the given
/// two-sided `level` (e.g. 0.95).
pub fn pooled_mean_difference_ci(
    a: &SummaryGroup,
    b: &SummaryGroup,
    level: f64,
) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&level) || level == 0.0 {
        return Err(Error::invalid(format!(
            "confidence level {level} outside (0, 1)"
        )));
    }
    let (var, df) = pooled_variance(a, b)?;
    let se = (var * (1.0 / a.n as f64 + 1.0 / b.n as f64)).sqrt();
    let t = t_critical_two_tailed(1.0 - level, df as f64);
    let diff = a.mean - b.mean;
    Ok((diff - t * se, diff + t * se))
}

/// Significance stars: `***` p < 0.001, `**` p < 0.01, `*` p < 0.05.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_computed_two_groups() {
        // means 2 and 5, grand 3.5: SSB = 3·1.5²·2 = 13.5, SSW = 2 + 2 = 4
        let r = anova_oneway(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]).unwrap();
        assert_eq!((r.df_between, r.df_within), (1, 4));
        assert!((r.ss_between - 13.5).abs() < 1e-12);
        assert!((r.ss_within - 4.0).abs() < 1e-12);
        assert!((r.f - 13.5).abs() < 1e-12);
    }

    #[test]
    fn equal_means_give_zero() {
        let r = anova_oneway(&[&[1.0, 2.0, 3.0], &[0.0, 2.0, 4.0]]).unwrap();
        assert_eq!(r.f, 0.0);
        assert_eq!(r.p, 1.0);
        let s = anova_from_summary(&[
            SummaryGroup::new("a", 5, 0.4, 0.1),
            SummaryGroup::new("b", 7, 0.4, 0.3),
        ])
        .unwrap();
        assert!(s.f < 1e-12);
    }

    #[test]
    fn degenerate_constant_groups() {
        let err = anova_oneway(&[&[2.0, 2.0], &[2.0, 2.0]]).unwrap_err();
        assert!(err.to_string().contains("zero within and between variance"));
    }

    #[test]
    fn no_within_spread_but_different_means() {
        let r = anova_oneway(&[&[1.0, 1.0], &[3.0, 3.0]]).unwrap();
        assert!(r.f.is_infinite());
        assert_eq!(r.p, 0.0);
    }

    #[test]
    fn precondition_errors() {
        assert!(anova_oneway(&[&[1.0, 2.0]]).is_err());
        assert!(anova_oneway(&[&[1.0], &[]]).is_err());
        assert!(anova_oneway(&[&[1.0], &[2.0]]).is_err());
        assert!(anova_from_summary(&[
            SummaryGroup::new("a", 0, 0.1, 0.0),
            SummaryGroup::new("b", 3, 0.2, 0.1),
        ])
        .is_err());
        assert!(anova_from_summary(&[
            SummaryGroup::new("a", 3, 0.1, -0.1),
            SummaryGroup::new("b", 3, 0.2, 0.1),
        ])
        .is_err());
    }

    #[test]
    fn stars_thresholds() {
        assert_eq!(stars(0.0005), "***");
        assert_eq!(stars(0.001), "**");
        assert_eq!(stars(0.0099), "**");
        assert_eq!(stars(0.047), "*");
        assert_eq!(stars(0.05), "");
    }

    #[test]
    fn pooled_ci_contains_difference() {
        let a = SummaryGroup::new("ADV", 15, 0.450, 0.311);
        let b = SummaryGroup::new("SCV", 12, 0.242, 0.165);
        let (lo, hi) = pooled_mean_difference_ci(&a, &b, 0.95).unwrap();
        assert!(lo < 0.208 && 0.208 < hi);
        assert!(lo > 0.0, "difference is significant so the CI excludes 0");
        assert!((hi + lo) / 2.0 - 0.208 < 1e-12);
    }

    fn sample_groups() -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 2..9), 2..5)
    }

    proptest! {
        #[test]
        fn summary_matches_raw(groups in sample_groups()) {
            let refs: Vec<&[f64]> = groups.iter().map(|g| g.as_slice()).collect();
            let raw = anova_oneway(&refs).unwrap();
            let summaries: Vec<SummaryGroup> = groups
                .iter()
                .enumerate()
                .map(|(i, g)| SummaryGroup::from_sample(format!("g{i}"), g).unwrap())
                .collect();
            let from_summary = anova_from_summary(&summaries).unwrap();
            prop_assert!((raw.f - from_summary.f).abs() <= 1e-9 * raw.f.abs().max(1e-12));
            prop_assert!((raw.p - from_summary.p).abs() <= 1e-9);
        }

        #[test]
        fn two_group_f_is_squared_pooled_t(
            a in prop::collection::vec(-10.0f64..10.0, 2..12),
            b in prop::collection::vec(-10.0f64..10.0, 2..12),
        ) {
            let r = anova_oneway(&[&a, &b]).unwrap();
            let t = pooled_t(
                &SummaryGroup::from_sample("a", &a).unwrap(),
                &SummaryGroup::from_sample("b", &b).unwrap(),
            ).unwrap();
            prop_assert!((r.f - t * t).abs() <= 1e-9 * r.f.max(1e-12));
        }
    }
}
