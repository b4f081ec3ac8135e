//! Village-level spatial stress analysis for rural aging.
//!
//! The crate works in two stages. The first derives four per-village
//! stress indices from terrain rasters and tabular surveys:
//!
//! * **SGI**, the share of village area steeper than a slope threshold,
//! * **SREI**, the share of village area above a daily insolation threshold,
//! * **WI**, a surface-weighted walkability score,
//! * **AII**, a multiplicative agricultural labor intensity composite.
//!
//! The second stage treats the resulting village × indicator table as a
//! multivariate sample: correlation and VIF screening, a two-class Fisher
//! discriminant that scores the administrative ADV/SCV labels, Mahalanobis
//! average-linkage clustering with silhouette and Calinski–Harabasz scans,
//! and one-way ANOVA comparisons of the two labelings.
//!
//! Per-cell raster kernels and the k-scan run on rayon when the `parallel`
//! feature is enabled (the default). Results are bit-identical to the
//! sequential path; see [`exec::Execution`].

pub mod classify;
pub mod error;
pub mod exec;
pub mod indices;
pub mod pipeline;
pub mod raster;
pub mod stats;

pub use error::{Error, Result};
