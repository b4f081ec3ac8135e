//! Configuration-driven runs: index derivation, the statistical stages and
//! report emission.
//!
//! Every command builds its outputs in memory as a [`Bundle`] and writes
//! nothing until all stages have succeeded.

mod config;
mod io;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{KRange, PipelineConfig, DEFAULT_CHOSEN_K};
pub use io::{
    csv_table, fmt_f64, parse_assignment, parse_crops, parse_manifest, parse_surfaces,
    parse_villages, Bundle, InputLog, RasterEntry, VillageRow,
};

use crate::classify::{
    adjusted_rand_index, align_labels, cross_tab_labels, lda_classify, lda_fit, scan_k_with,
    ClusterAssignment, Clustering, CrossTab, LdaEvaluation, StressMatrix, ValidityReport,
    INDICATORS,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::indices::{
    aii_share_at_least, assemble_stress_table, compute_aii, compute_sgi, compute_srei, compute_wi,
    AdminCategory, VillageIndices, AII_MODERATE_THRESHOLD,
};
use crate::raster::{
    daily_insolation_with, parse_ascii_grid, slope_degrees_with, RasterGrid, ZoneMask,
};
use crate::stats::{
    anova_oneway, correlation_report, pooled_mean_difference_ci, stars, CorrelationReport,
    SummaryGroup,
};

pub const VILLAGES_FILE: &str = "villages.csv";
pub const ASSIGNMENT_FILE: &str = "assignment.csv";
pub const ANOVA_ADMIN_FILE: &str = "anova_admin.csv";
pub const ANOVA_SPATIAL_FILE: &str = "anova_spatial.csv";
pub const REPORT_FILE: &str = "report.json";

const ANOVA_HEADER: [&str; 8] = ["indicator", "group", "n", "mean", "sd", "f", "p", "stars"];

fn key_for(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}

struct RasterLayers {
    dem: RasterGrid,
    slope: Option<RasterGrid>,
    insolation: Option<RasterGrid>,
}

/// Derives the four indices for every village in the villages table.
///
/// SGI and SREI come from the raster manifest when the village is listed
/// there, WI from the surfaces table and AII from the crops table; a
/// village absent from the raw inputs falls back to the value in the
/// villages table.
pub fn compute_indices(
    cfg: &PipelineConfig,
    exec: Execution,
    log: &mut InputLog,
) -> Result<Vec<VillageIndices>> {
    cfg.validate()?;
    let villages_path = cfg
        .villages
        .as_ref()
        .ok_or_else(|| Error::Config("no villages table configured".into()))?;
    let rows = parse_villages(&log.read(key_for(villages_path), &cfg.resolve(villages_path))?)?;
    let surfaces = match &cfg.surfaces {
        Some(p) => parse_surfaces(&log.read(key_for(p), &cfg.resolve(p))?)?,
        None => BTreeMap::new(),
    };
    let crops = match &cfg.crops {
        Some(p) => parse_crops(&log.read(key_for(p), &cfg.resolve(p))?)?,
        None => BTreeMap::new(),
    };
    let (manifest, manifest_dir, manifest_key_dir) = match &cfg.rasters {
        Some(p) => {
            let resolved = cfg.resolve(p);
            let m = parse_manifest(&log.read(key_for(p), &resolved)?)?;
            let dir = resolved.parent().map(Path::to_path_buf).unwrap_or_default();
            let key_dir = p.parent().map(Path::to_path_buf).unwrap_or_default();
            (m, dir, key_dir)
        }
        None => (BTreeMap::new(), PathBuf::new(), PathBuf::new()),
    };

    let mut layers: HashMap<PathBuf, RasterLayers> = HashMap::new();
    let load_grid = |rel: &Path, log: &mut InputLog| -> Result<RasterGrid> {
        let bytes = log.read(
            key_for(&manifest_key_dir.join(rel)),
            &manifest_dir.join(rel),
        )?;
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::invalid(format!("{} is not UTF-8 text", rel.display())))?;
        parse_ascii_grid(&text)
    };

    let mut out = Vec::with_capacity(rows.len());
    for row in &rows {
        let admin = row
            .admin()
            .map_err(|e| Error::invalid(format!("village {}: {e}", row.id)))?;
        let (sgi, srei) = match manifest.get(&row.id) {
            Some(entry) => {
                if !layers.contains_key(&entry.dem) {
                    let dem = load_grid(&entry.dem, log)?;
                    layers.insert(
                        entry.dem.clone(),
                        RasterLayers {
                            dem,
                            slope: None,
                            insolation: None,
                        },
                    );
                }
                let mask_grid = entry.mask.as_ref().map(|m| load_grid(m, log)).transpose()?;
                let layer = layers.get_mut(&entry.dem).expect("inserted above");
                let mask = match mask_grid {
                    Some(g) => ZoneMask::from_grid(row.id.clone(), &g)?,
                    None => ZoneMask::full(row.id.clone(), &layer.dem),
                };
                mask.check_congruent(&layer.dem)?;
                if layer.slope.is_none() {
                    layer.slope = Some(slope_degrees_with(&layer.dem, exec)?);
                }
                if layer.insolation.is_none() {
                    layer.insolation = Some(daily_insolation_with(&layer.dem, &cfg.solar, exec)?);
                }
                (
                    compute_sgi(layer.slope.as_ref().unwrap(), &mask, cfg.slope_threshold)?,
                    compute_srei(
                        layer.insolation.as_ref().unwrap(),
                        &mask,
                        cfg.srei_threshold,
                    )?,
                )
            }
            None => (
                row.sgi
                    .ok_or_else(|| Error::invalid(format!("SGI inputs missing: {}", row.id)))?,
                row.srei
                    .ok_or_else(|| Error::invalid(format!("SREI inputs missing: {}", row.id)))?,
            ),
        };
        let wi = match surfaces.get(&row.id) {
            Some(s) => compute_wi(s, &cfg.wi_weights)?,
            None => row
                .wi
                .ok_or_else(|| Error::invalid(format!("WI inputs missing: {}", row.id)))?,
        };
        let aii = match crops.get(&row.id) {
            Some(c) => {
                compute_aii(c).map_err(|e| Error::invalid(format!("AII for {}: {e}", row.id)))?
            }
            None => row
                .aii
                .ok_or_else(|| Error::invalid(format!("AII inputs missing: {}", row.id)))?,
        };
        let v = VillageIndices {
            village_id: row.id.clone(),
            name: row.name.clone(),
            admin_category: admin,
            sgi,
            srei,
            wi,
            aii,
        };
        v.validate()?;
        out.push(v);
    }
    Ok(out)
}

pub fn villages_csv(villages: &[VillageIndices]) -> Result<Vec<u8>> {
    csv_table(
        &["id", "name", "admin_category", "sgi", "srei", "wi", "aii"],
        villages.iter().map(|v| {
            vec![
                v.village_id.clone(),
                v.name.clone(),
                v.admin_category.to_string(),
                fmt_f64(v.sgi),
                fmt_f64(v.srei),
                fmt_f64(v.wi),
                fmt_f64(v.aii),
            ]
        }),
    )
}

fn load_table(
    cfg: &PipelineConfig,
    exec: Execution,
) -> Result<(Vec<VillageIndices>, StressMatrix, InputLog)> {
    let mut log = InputLog::default();
    let mut villages = compute_indices(cfg, exec, &mut log)?;
    villages.sort_by(|a, b| a.village_id.cmp(&b.village_id));
    let matrix = assemble_stress_table(&villages)?;
    Ok((villages, matrix, log))
}

// ---------------------------------------------------------------- ANOVA

/// One indicator's one-way ANOVA under a labeling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorAnova {
    pub indicator: String,
    pub groups: Vec<SummaryGroup>,
    pub f: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p: f64,
    pub stars: String,
}

/// Distinct labels, numerically ordered when all are integers.
fn ordered_labels(labels: &[String]) -> Vec<String> {
    let mut distinct: Vec<String> = labels.to_vec();
    distinct.sort();
    distinct.dedup();
    if distinct.iter().all(|l| l.parse::<u64>().is_ok()) {
        distinct.sort_by_key(|l| l.parse::<u64>().unwrap());
    }
    distinct
}

/// ANOVA of each indicator across the groups defined by `labels`.
pub fn anova_panel(matrix: &StressMatrix, labels: &[String]) -> Result<Vec<IndicatorAnova>> {
    if labels.len() != matrix.nrows() {
        return Err(Error::invalid(format!(
            "{} labels for {} villages",
            labels.len(),
            matrix.nrows()
        )));
    }
    let groups = ordered_labels(labels);
    let mut panel = Vec::with_capacity(INDICATORS.len());
    for (j, name) in INDICATORS.iter().enumerate() {
        let col = matrix.column(j);
        let samples: Vec<Vec<f64>> = groups
            .iter()
            .map(|g| {
                (0..col.len())
                    .filter(|&i| &labels[i] == g)
                    .map(|i| col[i])
                    .collect()
            })
            .collect();
        let refs: Vec<&[f64]> = samples.iter().map(|s| s.as_slice()).collect();
        let r = anova_oneway(&refs).map_err(|e| match e {
            Error::ZeroVariance(m) => Error::ZeroVariance(format!("{name}: {m}")),
            Error::Invalid(m) => Error::Invalid(format!("{name}: {m}")),
            other => other,
        })?;
        let summaries = groups
            .iter()
            .zip(&samples)
            .map(|(g, s)| SummaryGroup::from_sample(g.clone(), s))
            .collect::<Result<_>>()?;
        panel.push(IndicatorAnova {
            indicator: name.to_string(),
            groups: summaries,
            f: r.f,
            df_between: r.df_between,
            df_within: r.df_within,
            p: r.p,
            stars: stars(r.p).to_string(),
        });
    }
    Ok(panel)
}

pub fn anova_csv(panel: &[IndicatorAnova]) -> Result<Vec<u8>> {
    let rows = panel.iter().flat_map(|a| {
        a.groups.iter().map(move |g| {
            vec![
                a.indicator.clone(),
                g.label.clone(),
                g.n.to_string(),
                fmt_f64(g.mean),
                fmt_f64(g.sd),
                fmt_f64(a.f),
                fmt_f64(a.p),
                a.stars.clone(),
            ]
        })
    });
    csv_table(&ANOVA_HEADER, rows)
}

fn admin_labels(matrix: &StressMatrix) -> Vec<String> {
    matrix
        .admin_labels()
        .iter()
        .map(|a| a.to_string())
        .collect()
}

// ---------------------------------------------------------------- reports

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedValue {
    pub indicator: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VillageScore {
    pub village_id: String,
    pub admin_category: AdminCategory,
    pub ld1: f64,
    pub predicted: AdminCategory,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscriminantSummary {
    pub coefficients: Vec<NamedValue>,
    pub offset: f64,
    pub scores: Vec<VillageScore>,
    pub evaluation: LdaEvaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VillageCluster {
    pub village_id: String,
    pub cluster: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceComparison {
    /// `mapping[c - 1]` is the reported label of cut cluster `c`.
    pub mapping: Vec<usize>,
    pub agreement: usize,
    pub adjusted_rand_index: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub k: usize,
    pub assignment: Vec<VillageCluster>,
    pub reference: Option<ReferenceComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanDifference {
    pub indicator: String,
    /// ADV mean minus SCV mean.
    pub difference: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaPanels {
    pub administrative: Vec<IndicatorAnova>,
    pub spatial: Vec<IndicatorAnova>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config: PipelineConfig,
    /// SHA-256 of each input file, keyed by its configured path.
    pub inputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub villages: Vec<VillageIndices>,
    /// Share of villages with AII at or above the moderate band.
    pub aii_moderate_share: f64,
    pub correlation: CorrelationReport,
    pub discriminant: DiscriminantSummary,
    pub validity: ValidityReport,
    pub clusters: ClusterSummary,
    pub anova: AnovaPanels,
    pub admin_mean_difference: Vec<MeanDifference>,
    pub crosstab: CrossTab,
    pub provenance: Provenance,
}

fn correlation_files(report: &CorrelationReport, bundle: &mut Bundle) -> Result<()> {
    let mut header = vec!["indicator"];
    header.extend(INDICATORS);
    for (name, m) in [
        ("correlation_r.csv", &report.r_matrix),
        ("correlation_p.csv", &report.p_matrix),
    ] {
        let rows = report.columns.iter().zip(m).map(|(c, row)| {
            std::iter::once(c.clone())
                .chain(row.iter().map(|v| fmt_f64(*v)))
                .collect()
        });
        bundle.add(name, csv_table(&header, rows)?);
    }
    bundle.add(
        "vif.csv",
        csv_table(
            &["indicator", "vif"],
            report
                .columns
                .iter()
                .zip(&report.vif)
                .map(|(c, v)| vec![c.clone(), fmt_f64(*v)]),
        )?,
    );
    Ok(())
}

fn discriminant(matrix: &StressMatrix) -> Result<DiscriminantSummary> {
    let model = lda_fit(matrix)?;
    let evaluation = lda_classify(&model);
    let scores = model
        .row_ids
        .iter()
        .zip(&model.labels)
        .zip(&model.scores)
        .zip(&evaluation.predicted)
        .map(|(((id, &a), &s), &p)| VillageScore {
            village_id: id.clone(),
            admin_category: a,
            ld1: s,
            predicted: p,
        })
        .collect();
    Ok(DiscriminantSummary {
        coefficients: INDICATORS
            .iter()
            .zip(&model.coefficients)
            .map(|(n, &v)| NamedValue {
                indicator: n.to_string(),
                value: v,
            })
            .collect(),
        offset: model.offset,
        scores,
        evaluation,
    })
}

fn discriminant_files(d: &DiscriminantSummary, bundle: &mut Bundle) -> Result<()> {
    bundle.add(
        "lda_scores.csv",
        csv_table(
            &["village_id", "admin_category", "ld1", "predicted"],
            d.scores.iter().map(|s| {
                vec![
                    s.village_id.clone(),
                    s.admin_category.to_string(),
                    fmt_f64(s.ld1),
                    s.predicted.to_string(),
                ]
            }),
        )?,
    );
    let e = &d.evaluation;
    let mut rows: Vec<Vec<String>> = e
        .classes
        .iter()
        .map(|c| {
            vec![
                c.class.to_string(),
                c.n.to_string(),
                fmt_f64(c.mean),
                fmt_f64(c.sd),
                fmt_f64(c.min),
                fmt_f64(c.max),
                c.correct.to_string(),
                fmt_f64(c.accuracy),
            ]
        })
        .collect();
    rows.push(vec![
        "total".into(),
        e.total.to_string(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        e.correct.to_string(),
        fmt_f64(e.accuracy),
    ]);
    bundle.add(
        "lda_summary.csv",
        csv_table(
            &[
                "group", "n", "ld1_mean", "ld1_sd", "ld1_min", "ld1_max", "correct", "accuracy",
            ],
            rows,
        )?,
    );
    Ok(())
}

struct ClusterStage {
    validity: ValidityReport,
    clustering: Clustering,
    summary: ClusterSummary,
    /// Reported labels per village.
    labels: Vec<usize>,
}

fn read_reference(
    cfg: &PipelineConfig,
    matrix: &StressMatrix,
    log: &mut InputLog,
) -> Result<Option<Vec<usize>>> {
    let Some(p) = &cfg.reference_clusters else {
        return Ok(None);
    };
    let raw = parse_assignment(&log.read(key_for(p), &cfg.resolve(p))?)?;
    let labels = aligned_to_ids(&raw, matrix.row_ids(), "reference clusters")?;
    labels
        .iter()
        .map(|l| {
            l.parse::<usize>().ok().filter(|&v| v >= 1).ok_or_else(|| {
                Error::invalid(format!(
                    "reference cluster label `{l}` is not a positive integer"
                ))
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

fn aligned_to_ids(
    raw: &BTreeMap<String, String>,
    ids: &[String],
    what: &str,
) -> Result<Vec<String>> {
    if let Some(extra) = raw.keys().find(|k| !ids.contains(k)) {
        return Err(Error::invalid(format!(
            "{what} list unknown village {extra}"
        )));
    }
    ids.iter()
        .map(|id| {
            raw.get(id)
                .cloned()
                .ok_or_else(|| Error::invalid(format!("{what} missing village {id}")))
        })
        .collect()
}

/// Cluster counts must leave at least one merge uncut.
fn check_k(cfg: &PipelineConfig, n: usize) -> Result<()> {
    if cfg.k_range.max >= n {
        return Err(Error::invalid(format!(
            "k_range exceeds n-1: kmax = {} with n = {n}",
            cfg.k_range.max
        )));
    }
    if cfg.chosen_k >= n {
        return Err(Error::invalid(format!(
            "chosen_k = {} exceeds n-1 = {}",
            cfg.chosen_k,
            n - 1
        )));
    }
    Ok(())
}

fn cluster_stage(
    cfg: &PipelineConfig,
    matrix: &StressMatrix,
    reference: Option<&[usize]>,
    exec: Execution,
) -> Result<ClusterStage> {
    check_k(cfg, matrix.nrows())?;
    let clustering = Clustering::from_stress(matrix)?;
    let validity = scan_k_with(&clustering, cfg.k_range.min, cfg.k_range.max, exec)?;
    let k = cfg.chosen_k;
    let cut: ClusterAssignment = clustering.cut(k)?;
    let (labels, reference) = match reference {
        Some(r) => {
            let al = align_labels(&cut, r)?;
            let labels = al.apply(&cut);
            let ari = adjusted_rand_index(&cut.labels, r)?;
            (
                labels,
                Some(ReferenceComparison {
                    mapping: al.mapping,
                    agreement: al.agreement,
                    adjusted_rand_index: ari,
                }),
            )
        }
        None => (cut.labels.clone(), None),
    };
    let assignment = matrix
        .row_ids()
        .iter()
        .zip(&labels)
        .map(|(id, &c)| VillageCluster {
            village_id: id.clone(),
            cluster: c,
        })
        .collect();
    Ok(ClusterStage {
        validity,
        clustering,
        summary: ClusterSummary {
            k,
            assignment,
            reference,
        },
        labels,
    })
}

fn cluster_files(stage: &ClusterStage, bundle: &mut Bundle) -> Result<()> {
    bundle.add(
        "validity.csv",
        csv_table(
            &["k", "silhouette", "calinski_harabasz"],
            stage.validity.rows.iter().map(|r| {
                vec![
                    r.k.to_string(),
                    fmt_f64(r.silhouette),
                    fmt_f64(r.calinski_harabasz),
                ]
            }),
        )?,
    );
    bundle.add(
        "merges.csv",
        csv_table(
            &["node_a", "node_b", "height", "new_id"],
            stage.clustering.tree.merges.iter().map(|m| {
                vec![
                    m.node_a.to_string(),
                    m.node_b.to_string(),
                    fmt_f64(m.height),
                    m.new_id.to_string(),
                ]
            }),
        )?,
    );
    bundle.add(
        ASSIGNMENT_FILE,
        csv_table(
            &["village_id", "cluster"],
            stage
                .summary
                .assignment
                .iter()
                .map(|a| vec![a.village_id.clone(), a.cluster.to_string()]),
        )?,
    );
    Ok(())
}

fn crosstab_csv(t: &CrossTab) -> Result<Vec<u8>> {
    let mut header = vec!["admin_category".to_string()];
    header.extend((1..=t.k).map(|c| format!("cluster_{c}")));
    header.push("total".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows: Vec<Vec<String>> = AdminCategory::ALL
        .iter()
        .enumerate()
        .map(|(i, a)| {
            std::iter::once(a.to_string())
                .chain(t.counts[i].iter().map(|c| c.to_string()))
                .chain(std::iter::once(t.row_totals[i].to_string()))
                .collect()
        })
        .collect();
    rows.push(
        std::iter::once("total".to_string())
            .chain(t.column_totals.iter().map(|c| c.to_string()))
            .chain(std::iter::once(t.n.to_string()))
            .collect(),
    );
    csv_table(&header_refs, rows)
}

fn mean_differences(panel: &[IndicatorAnova]) -> Result<Vec<MeanDifference>> {
    panel
        .iter()
        .map(|a| {
            let find = |label: &str| {
                a.groups
                    .iter()
                    .find(|g| g.label == label)
                    .ok_or_else(|| Error::invalid(format!("no {label} villages")))
            };
            let adv = find("ADV")?;
            let scv = find("SCV")?;
            let (lower, upper) = pooled_mean_difference_ci(adv, scv, 0.95)?;
            Ok(MeanDifference {
                indicator: a.indicator.clone(),
                difference: adv.mean - scv.mean,
                lower,
                upper,
            })
        })
        .collect()
}

// ---------------------------------------------------------------- commands

/// Per-village indices table.
pub fn cmd_indices(cfg: &PipelineConfig) -> Result<Bundle> {
    let (villages, _, _) = load_table(cfg, Execution::default())?;
    let mut b = Bundle::default();
    b.add(VILLAGES_FILE, villages_csv(&villages)?);
    Ok(b)
}

/// Correlation and VIF matrices.
pub fn cmd_correlate(cfg: &PipelineConfig) -> Result<Bundle> {
    let (_, matrix, _) = load_table(cfg, Execution::default())?;
    let mut b = Bundle::default();
    correlation_files(&correlation_report(&matrix)?, &mut b)?;
    Ok(b)
}

/// Discriminant scores and the per-class evaluation table.
pub fn cmd_lda(cfg: &PipelineConfig) -> Result<Bundle> {
    let (_, matrix, _) = load_table(cfg, Execution::default())?;
    let mut b = Bundle::default();
    discriminant_files(&discriminant(&matrix)?, &mut b)?;
    Ok(b)
}

/// Validity scan, merge table and the cut at `chosen_k`.
pub fn cmd_cluster(cfg: &PipelineConfig) -> Result<Bundle> {
    let exec = Execution::default();
    let (_, matrix, mut log) = load_table(cfg, exec)?;
    let reference = read_reference(cfg, &matrix, &mut log)?;
    let stage = cluster_stage(cfg, &matrix, reference.as_deref(), exec)?;
    let mut b = Bundle::default();
    cluster_files(&stage, &mut b)?;
    Ok(b)
}

/// Per-indicator F and p under two labelings, side by side.
pub fn cmd_compare(cfg: &PipelineConfig, labels_a: &Path, labels_b: &Path) -> Result<Bundle> {
    let (_, matrix, mut log) = load_table(cfg, Execution::default())?;
    let mut panels = Vec::new();
    for p in [labels_a, labels_b] {
        let raw = parse_assignment(&log.read(key_for(p), p)?)?;
        let labels = aligned_to_ids(&raw, matrix.row_ids(), &p.display().to_string())?;
        panels.push(anova_panel(&matrix, &labels)?);
    }
    let rows = panels[0].iter().zip(&panels[1]).map(|(a, b)| {
        vec![
            a.indicator.clone(),
            fmt_f64(a.f),
            fmt_f64(a.p),
            a.stars.clone(),
            fmt_f64(b.f),
            fmt_f64(b.p),
            b.stars.clone(),
        ]
    });
    let mut b = Bundle::default();
    b.add(
        "comparison.csv",
        csv_table(
            &[
                "indicator",
                "f_a",
                "p_a",
                "stars_a",
                "f_b",
                "p_b",
                "stars_b",
            ],
            rows,
        )?,
    );
    Ok(b)
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<(RunReport, Bundle)> {
    run_pipeline_with(cfg, Execution::default())
}

/// Full run: indices, correlation, discriminant, clustering, both ANOVA
/// panels and the cross-tabulation.
pub fn run_pipeline_with(cfg: &PipelineConfig, exec: Execution) -> Result<(RunReport, Bundle)> {
    let (villages, matrix, mut log) = load_table(cfg, exec)?;
    check_k(cfg, matrix.nrows())?;
    let reference = read_reference(cfg, &matrix, &mut log)?;

    let correlation = correlation_report(&matrix)?;
    let discriminant = discriminant(&matrix)?;
    let clusters = cluster_stage(cfg, &matrix, reference.as_deref(), exec)?;

    let spatial_labels: Vec<String> = clusters.labels.iter().map(|l| l.to_string()).collect();
    let administrative = anova_panel(&matrix, &admin_labels(&matrix))?;
    let spatial = anova_panel(&matrix, &spatial_labels)?;
    let admin_mean_difference = mean_differences(&administrative)?;
    let max_label = clusters.labels.iter().copied().max().unwrap_or(0);
    let crosstab = cross_tab_labels(matrix.admin_labels(), &clusters.labels, max_label)?;

    let mut bundle = Bundle::default();
    bundle.add(VILLAGES_FILE, villages_csv(&villages)?);
    correlation_files(&correlation, &mut bundle)?;
    discriminant_files(&discriminant, &mut bundle)?;
    cluster_files(&clusters, &mut bundle)?;
    bundle.add(ANOVA_ADMIN_FILE, anova_csv(&administrative)?);
    bundle.add(ANOVA_SPATIAL_FILE, anova_csv(&spatial)?);
    bundle.add("crosstab.csv", crosstab_csv(&crosstab)?);

    let report = RunReport {
        aii_moderate_share: aii_share_at_least(&villages, AII_MODERATE_THRESHOLD),
        villages,
        correlation,
        discriminant,
        validity: clusters.validity,
        clusters: clusters.summary,
        anova: AnovaPanels {
            administrative,
            spatial,
        },
        admin_mean_difference,
        crosstab,
        provenance: Provenance {
            config: cfg.clone(),
            inputs: log.digests,
        },
    };
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    bundle.add(REPORT_FILE, json);
    Ok((report, bundle))
}

/// Writes a bundle into the configured output directory.
pub fn emit(cfg: &PipelineConfig, bundle: &Bundle) -> Result<Vec<PathBuf>> {
    bundle.write(&cfg.out_dir())
}

// ---------------------------------------------------------------- audit

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub cells_checked: usize,
    pub mismatches: Vec<String>,
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300)
}

fn parse_num(s: &str, file: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::invalid(format!("{file}: `{s}` is not a number")))
}

fn audit_panel(
    file: &str,
    bytes: &[u8],
    expected: &[IndicatorAnova],
    report: &mut AuditReport,
) -> Result<()> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != ANOVA_HEADER {
        return Err(Error::invalid(format!(
            "{file}: unexpected header {header:?}"
        )));
    }
    let mut seen = 0;
    for rec in rdr.records() {
        let rec = rec?;
        let (ind, grp) = (&rec[0], &rec[1]);
        let Some(a) = expected.iter().find(|a| a.indicator == ind) else {
            report
                .mismatches
                .push(format!("{file}: unknown indicator {ind}"));
            continue;
        };
        let Some(g) = a.groups.iter().find(|g| g.label == grp) else {
            report
                .mismatches
                .push(format!("{file}: {ind} has unknown group {grp}"));
            continue;
        };
        seen += 1;
        let mut check = |col: &str, ok: bool| {
            report.cells_checked += 1;
            if !ok {
                report
                    .mismatches
                    .push(format!("{file}: {ind}/{grp} {col} does not recompute"));
            }
        };
        check("n", rec[2].trim() == g.n.to_string());
        check("mean", close(parse_num(&rec[3], file)?, g.mean));
        check("sd", close(parse_num(&rec[4], file)?, g.sd));
        check("f", close(parse_num(&rec[5], file)?, a.f));
        check("p", close(parse_num(&rec[6], file)?, a.p));
        check("stars", rec[7].trim() == a.stars);
    }
    let expected_rows: usize = expected.iter().map(|a| a.groups.len()).sum();
    if seen != expected_rows {
        report
            .mismatches
            .push(format!("{file}: {seen} rows, expected {expected_rows}"));
    }
    Ok(())
}

/// Recomputes both emitted ANOVA tables from the emitted villages and
/// assignment CSVs in `dir`.
pub fn cmd_audit(dir: &Path) -> Result<AuditReport> {
    let read = |name: &str| {
        let p = dir.join(name);
        std::fs::read(&p).map_err(|e| Error::io(p, e))
    };
    let rows = parse_villages(&read(VILLAGES_FILE)?)?;
    let villages = rows
        .iter()
        .map(|r| {
            let missing = |what: &str| {
                Error::invalid(format!("{VILLAGES_FILE}: {what} missing for {}", r.id))
            };
            Ok(VillageIndices {
                village_id: r.id.clone(),
                name: r.name.clone(),
                admin_category: r.admin()?,
                sgi: r.sgi.ok_or_else(|| missing("sgi"))?,
                srei: r.srei.ok_or_else(|| missing("srei"))?,
                wi: r.wi.ok_or_else(|| missing("wi"))?,
                aii: r.aii.ok_or_else(|| missing("aii"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let matrix = assemble_stress_table(&villages)?;
    let assignment = parse_assignment(&read(ASSIGNMENT_FILE)?)?;
    let spatial = aligned_to_ids(&assignment, matrix.row_ids(), ASSIGNMENT_FILE)?;

    let mut report = AuditReport {
        cells_checked: 0,
        mismatches: Vec::new(),
    };
    audit_panel(
        ANOVA_ADMIN_FILE,
        &read(ANOVA_ADMIN_FILE)?,
        &anova_panel(&matrix, &admin_labels(&matrix))?,
        &mut report,
    )?;
    audit_panel(
        ANOVA_SPATIAL_FILE,
        &read(ANOVA_SPATIAL_FILE)?,
        &anova_panel(&matrix, &spatial)?,
        &mut report,
    )?;
    Ok(report)
}
