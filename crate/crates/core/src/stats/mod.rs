//! Correlation, VIF, one-way ANOVA and the F / t tail probabilities.

mod anova;
mod correlation;
pub mod special;

pub use anova::{
    anova_from_summary, anova_oneway, pooled_mean_difference_ci, pooled_t, stars, AnovaResult,
    SummaryGroup,
};
pub use correlation::{
    correlation_report, pearson_p, pearson_r, vif, vif_columns, CorrelationReport, FlaggedPair,
    COLLINEARITY_TOLERANCE,
};
pub use special::{f_tail, ln_gamma, regularized_incomplete_beta, t_two_tailed};

/// Significance level used for flagging correlated pairs.
pub const ALPHA: f64 = 0.05;
