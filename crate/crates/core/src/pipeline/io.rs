//! CSV inputs and outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::indices::{AdminCategory, CropComponent, CropSystem, SurfaceComposition};

/// Reads input files and records a SHA-256 digest of each under a stable
/// key (the path as written in the config).
#[derive(Debug, Default)]
pub struct InputLog {
    pub digests: BTreeMap<String, String>,
}

impl InputLog {
    pub fn read(&mut self, key: impl Into<String>, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        self.digests
            .insert(key.into(), hex::encode(Sha256::digest(&bytes)));
        Ok(bytes)
    }
}

fn reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(bytes)
}

fn unique<T>(rows: Vec<(String, T)>, what: &str) -> Result<BTreeMap<String, T>> {
    let mut out = BTreeMap::new();
    for (id, v) in rows {
        if out.contains_key(&id) {
            return Err(Error::invalid(format!("duplicate id {id} in {what}")));
        }
        out.insert(id, v);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct VillageRow {
    pub id: String,
    pub name: String,
    pub admin_category: String,
    #[serde(default)]
    pub sgi: Option<f64>,
    #[serde(default)]
    pub srei: Option<f64>,
    #[serde(default)]
    pub wi: Option<f64>,
    #[serde(default)]
    pub aii: Option<f64>,
}

impl VillageRow {
    pub fn admin(&self) -> Result<AdminCategory> {
        self.admin_category.parse()
    }
}

pub fn parse_villages(bytes: &[u8]) -> Result<Vec<VillageRow>> {
    let rows: Vec<VillageRow> = reader(bytes).deserialize().collect::<Result<_, _>>()?;
    let keyed = unique(
        rows.into_iter().map(|r| (r.id.clone(), r)).collect(),
        "villages",
    )?;
    Ok(keyed.into_values().collect())
}

#[derive(Deserialize)]
struct SurfaceRow {
    id: String,
    paved_share: f64,
    hardened_share: f64,
    rough_share: f64,
}

pub fn parse_surfaces(bytes: &[u8]) -> Result<BTreeMap<String, SurfaceComposition>> {
    let mut rows = Vec::new();
    for r in reader(bytes).deserialize() {
        let r: SurfaceRow = r?;
        let comp = SurfaceComposition::new(r.paved_share, r.hardened_share, r.rough_share)
            .map_err(|e| Error::invalid(format!("surfaces for {}: {e}", r.id)))?;
        rows.push((r.id, comp));
    }
    unique(rows, "surfaces")
}

#[derive(Deserialize)]
struct CropRow {
    id: String,
    labor_weight: f64,
    area_share: f64,
    temporal_concentration: f64,
    labor_share: f64,
}

/// Long-format crop table: several rows per village, with the village-level
/// fields repeated identically on each.
pub fn parse_crops(bytes: &[u8]) -> Result<BTreeMap<String, CropSystem>> {
    let mut out: BTreeMap<String, CropSystem> = BTreeMap::new();
    for r in reader(bytes).deserialize() {
        let r: CropRow = r?;
        let component = CropComponent {
            labor_weight: r.labor_weight,
            area_share: r.area_share,
        };
        match out.get_mut(&r.id) {
            Some(sys) => {
                if sys.temporal_concentration != r.temporal_concentration
                    || sys.labor_share != r.labor_share
                {
                    return Err(Error::invalid(format!(
                        "crops for {} disagree on temporal_concentration or labor_share",
                        r.id
                    )));
                }
                sys.components.push(component);
            }
            None => {
                out.insert(
                    r.id,
                    CropSystem {
                        components: vec![component],
                        temporal_concentration: r.temporal_concentration,
                        labor_share: r.labor_share,
                    },
                );
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RasterEntry {
    pub id: String,
    pub dem: PathBuf,
    #[serde(default)]
    pub mask: Option<PathBuf>,
}

pub fn parse_manifest(bytes: &[u8]) -> Result<BTreeMap<String, RasterEntry>> {
    let rows: Vec<RasterEntry> = reader(bytes).deserialize().collect::<Result<_, _>>()?;
    unique(
        rows.into_iter().map(|r| (r.id.clone(), r)).collect(),
        "raster manifest",
    )
}

#[derive(Deserialize)]
struct AssignmentRow {
    village_id: String,
    cluster: String,
}

/// `village_id,cluster` with arbitrary label strings.
pub fn parse_assignment(bytes: &[u8]) -> Result<BTreeMap<String, String>> {
    let rows = reader(bytes)
        .deserialize()
        .map(|r| r.map(|r: AssignmentRow| (r.village_id, r.cluster)))
        .collect::<Result<Vec<_>, _>>()?;
    unique(rows, "assignment")
}

/// Shortest round-trip decimal; `inf`, `-inf`, `NaN` otherwise.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner()
        .map_err(|e| Error::invalid(format!("csv buffer: {e}")))
}

/// Named output files, written together once a command has succeeded.
#[derive(Debug, Default, Clone)]
pub struct Bundle {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Bundle {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, b)| b.as_slice())
    }

    /// Writes every file into `dir`. If any write fails, files already
    /// written by this call are removed.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            if let Err(e) = fs::write(&path, bytes) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                let _ = fs::remove_file(&path);
                return Err(Error::io(path, e));
            }
            written.push(path);
        }
        Ok(written)
    }
}
