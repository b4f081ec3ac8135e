//! Multivariate analysis of the village stress table: standardization,
//! Mahalanobis distances, two-class LDA, UPGMA clustering with validity
//! indices, and cross-tabulation against administrative labels.

mod crosstab;
mod distance;
mod hclust;
mod lda;
mod matrix;
mod validity;

pub use crosstab::{
    adjusted_rand_index, align_labels, cross_tab, cross_tab_labels, CrossTab, LabelAlignment,
};
pub use distance::{
    mahalanobis_distances, mahalanobis_matrix, sample_covariance, standardize, standardize_columns,
    whiten, DistanceMatrix, COVARIANCE_RIDGE,
};
pub use hclust::{cut_tree, hclust_average, ClusterAssignment, LinkageTree, Merge};
pub use lda::{
    classify_scores, lda_classify, lda_fit, predict, ClassScoreSummary, DiscriminantModel,
    LdaEvaluation,
};
pub use matrix::{StressMatrix, INDICATORS};
pub use validity::{
    calinski_harabasz, scan_k, scan_k_with, silhouette, Clustering, Silhouette, ValidityReport,
    ValidityRow, DEFAULT_KMAX, DEFAULT_KMIN,
};
