mod common;

use std::fs;
use std::path::Path;
use std::time::Instant;

use agepress::exec::Execution;
use agepress::pipeline::{
    cmd_audit, cmd_compare, cmd_indices, emit, run_pipeline, run_pipeline_with, PipelineConfig,
    ANOVA_ADMIN_FILE, ANOVA_SPATIAL_FILE, VILLAGES_FILE,
};
use agepress::raster::solar::flat_daily_hours;
use agepress::raster::{RasterGrid, SolarParams};
use agepress::Error;
use common::*;

fn township_config() -> PipelineConfig {
    PipelineConfig::load(&fixture_dir().join("pipeline.toml")).unwrap()
}

#[test]
fn township_end_to_end() {
    let cfg = township_config();
    let start = Instant::now();
    let (report, bundle) = run_pipeline(&cfg).unwrap();
    assert!(start.elapsed().as_secs_f64() < 5.0);

    let starred =
        |p: &[agepress::pipeline::IndicatorAnova]| p.iter().filter(|a| !a.stars.is_empty()).count();
    assert_eq!(starred(&report.anova.spatial), 4);
    assert_eq!(starred(&report.anova.administrative), 3);
    assert!(report.anova.spatial.iter().all(|a| a.p < 0.01));
    assert_eq!(report.clusters.k, 4);
    assert_eq!(
        report
            .crosstab
            .count(agepress::indices::AdminCategory::Scv, 4),
        7
    );
    let reference = report.clusters.reference.as_ref().unwrap();
    assert_eq!(reference.adjusted_rand_index, 1.0);

    let direct = report.villages.iter().filter(|v| v.aii >= 0.36).count() as f64 / 27.0;
    assert_eq!(report.aii_moderate_share, direct);
    let json = String::from_utf8(bundle.get("report.json").unwrap().to_vec()).unwrap();
    assert!(json.contains("\"aii_moderate_share\""));
    assert!(!json.contains("\"out\""));
    assert!(report.provenance.inputs.contains_key("villages.csv"));
}

#[test]
fn sequential_and_parallel_bundles_are_identical() {
    let cfg = township_config();
    let (_, a) = run_pipeline_with(&cfg, Execution::Sequential).unwrap();
    let (_, b) = run_pipeline_with(&cfg, Execution::Parallel).unwrap();
    let (_, c) = run_pipeline_with(&cfg, Execution::Parallel).unwrap();
    assert_eq!(a.files, b.files);
    assert_eq!(b.files, c.files);
}

#[test]
fn emitted_bundle_passes_audit_and_tampering_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = township_config();
    cfg.out = Some(dir.path().to_path_buf());
    let (_, bundle) = run_pipeline(&cfg).unwrap();
    let written = emit(&cfg, &bundle).unwrap();
    assert_eq!(written.len(), 13);
    let audit = cmd_audit(dir.path()).unwrap();
    assert!(audit.mismatches.is_empty(), "{:?}", audit.mismatches);
    assert!(audit.cells_checked > 0);

    let path = dir.path().join(ANOVA_SPATIAL_FILE);
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut fields: Vec<String> = lines[1].split(',').map(String::from).collect();
    fields[3] = "0.999".into();
    lines[1] = fields.join(",");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    assert!(!cmd_audit(dir.path()).unwrap().mismatches.is_empty());
}

#[test]
fn compare_identical_labelings() {
    let cfg = township_config();
    let reference = fixture_dir().join("reference_clusters.csv");
    let bundle = cmd_compare(&cfg, &reference, &reference).unwrap();
    let text = String::from_utf8(bundle.get("comparison.csv").unwrap().to_vec()).unwrap();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[1..4], f[4..7]);
    }
}

#[test]
fn compare_rejects_empty_groups_and_id_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = township_config();
    let reference = fixture_dir().join("reference_clusters.csv");
    let missing = dir.path().join("missing.csv");
    let text = fs::read_to_string(&reference).unwrap();
    let short: Vec<&str> = text.lines().take(20).collect();
    fs::write(&missing, short.join("\n")).unwrap();
    assert!(cmd_compare(&cfg, &reference, &missing).is_err());

    let single = dir.path().join("single.csv");
    let one: String = std::iter::once("village_id,cluster".to_string())
        .chain(
            text.lines()
                .skip(1)
                .map(|l| format!("{},1", l.split(',').next().unwrap())),
        )
        .collect::<Vec<_>>()
        .join("\n");
    fs::write(&single, one).unwrap();
    assert!(cmd_compare(&cfg, &reference, &single).is_err());
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

/// Three villages whose indices all come from raw inputs: a tilted DEM, a
/// flat DEM and a half mask on the tilted one.
fn raster_fixture(dir: &Path) -> PipelineConfig {
    let tilted = RasterGrid::from_fn(12, 12, 10.0, |_, c| 2.0 * c as f64).unwrap();
    let flat = RasterGrid::from_fn(12, 12, 10.0, |_, _| 50.0).unwrap();
    let half = RasterGrid::from_fn(12, 12, 10.0, |r, _| if r < 6 { 1.0 } else { 0.0 }).unwrap();
    write(dir, "tilted.asc", &tilted.to_ascii());
    write(dir, "flat.asc", &flat.to_ascii());
    write(dir, "half.asc", &half.to_ascii());
    write(
        dir,
        "rasters.csv",
        "id,dem,mask\nA,tilted.asc,\nB,flat.asc,\nC,tilted.asc,half.asc\n",
    );
    // the precomputed SGI for A must be ignored in favor of the raster
    write(
        dir,
        "villages.csv",
        "id,name,admin_category,sgi\nA,Alpha,ADV,0.5\nB,Beta,SCV,\nC,Gamma,ADV,\n",
    );
    write(
        dir,
        "surfaces.csv",
        "id,paved_share,hardened_share,rough_share\nA,1,0,0\nB,0,0,1\nC,0.5,0,0.5\n",
    );
    write(
        dir,
        "crops.csv",
        "id,labor_weight,area_share,temporal_concentration,labor_share\n\
         A,1.0,0.5,0.8,0.5\nA,0.3,0.5,0.8,0.5\nB,0.3,1.0,1.0,0.6\nC,0.6,1.0,0.5,0.5\n",
    );
    PipelineConfig::from_toml(
        "villages = \"villages.csv\"\nsurfaces = \"surfaces.csv\"\ncrops = \"crops.csv\"\nrasters = \"rasters.csv\"\n",
        dir,
    )
    .unwrap()
}

#[test]
fn raster_inputs_drive_the_indices() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = raster_fixture(dir.path());
    let bundle = cmd_indices(&cfg).unwrap();
    let text = String::from_utf8(bundle.get(VILLAGES_FILE).unwrap().to_vec()).unwrap();
    let rows: Vec<Vec<String>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    let col = |id: &str, j: usize| -> f64 {
        rows.iter().find(|r| r[0] == id).unwrap()[j]
            .parse()
            .unwrap()
    };
    // 0.2 gradient inside, 0.1 on the replicated edges: both above 4.8°
    assert_eq!(col("A", 3), 1.0);
    assert_eq!(col("B", 3), 0.0);
    assert_eq!(col("C", 3), 1.0);

    let params = SolarParams::default();
    let flat_day =
        params.direct_normal_irradiance * flat_daily_hours(params.latitude, params.day_of_year);
    let expected = if flat_day > cfg.srei_threshold {
        1.0
    } else {
        0.0
    };
    assert_eq!(col("B", 4), expected);

    assert_eq!(col("A", 5), 1.0);
    assert_eq!(col("B", 5), 0.3);
    assert_eq!(col("C", 5), 0.65);
    assert!((col("A", 6) - 0.65 * 0.8 * 0.5).abs() < 1e-15);
    assert!((col("B", 6) - 0.18).abs() < 1e-15);
    assert!((col("C", 6) - 0.15).abs() < 1e-15);
}

#[test]
fn three_villages_cannot_scan_to_sixteen() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = raster_fixture(dir.path());
    let err = run_pipeline(&cfg).unwrap_err();
    assert!(err.to_string().contains("k_range exceeds n-1"), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn missing_inputs_are_reported_by_index() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "villages.csv",
        "id,name,admin_category,sgi,srei,wi\nA,Alpha,ADV,0.1,0.2,0.5\n",
    );
    let cfg = PipelineConfig::from_toml("villages = \"villages.csv\"", dir.path()).unwrap();
    let err = cmd_indices(&cfg).unwrap_err();
    assert!(err.to_string().contains("AII inputs missing: A"), "{err}");
}

#[test]
fn zero_variance_indicator_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("id,name,admin_category,sgi,srei,wi,aii\n");
    for i in 0..8 {
        let admin = if i % 2 == 0 { "ADV" } else { "SCV" };
        text += &format!(
            "v{i},V{i},{admin},{},{},{},0.3\n",
            0.1 * i as f64,
            0.9 - 0.07 * i as f64,
            0.4 + 0.03 * (i % 3) as f64
        );
    }
    write(dir.path(), "villages.csv", &text);
    let cfg = PipelineConfig::from_toml(
        "villages = \"villages.csv\"\nk_range = \"2..5\"",
        dir.path(),
    )
    .unwrap();
    let err = run_pipeline(&cfg).unwrap_err();
    assert!(matches!(err, Error::ZeroVariance(_)), "{err}");
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn admin_panel_file_has_one_row_per_group() {
    let (_, bundle) = run_pipeline(&township_config()).unwrap();
    let text = String::from_utf8(bundle.get(ANOVA_ADMIN_FILE).unwrap().to_vec()).unwrap();
    assert_eq!(text.lines().count(), 1 + 4 * 2);
}
