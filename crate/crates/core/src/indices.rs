//! The four village stress indices and the township stress table.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classify::StressMatrix;
use crate::error::{Error, Result};
use crate::raster::{zone_fraction_above, RasterGrid, ZoneMask};

pub const DEFAULT_SLOPE_THRESHOLD: f64 = 4.8;
pub const DEFAULT_SREI_THRESHOLD: f64 = 20_000.0;
/// Lower bound of the "moderate-to-high" agricultural intensity band.
pub const AII_MODERATE_THRESHOLD: f64 = 0.36;

const SHARE_TOLERANCE: f64 = 1e-9;

/// Administrative village category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AdminCategory {
    /// Agricultural-dependent village.
    #[serde(rename = "ADV")]
    Adv,
    /// Service-centered village.
    #[serde(rename = "SCV")]
    Scv,
}

impl AdminCategory {
    pub const ALL: [AdminCategory; 2] = [AdminCategory::Adv, AdminCategory::Scv];

    pub fn as_str(self) -> &'static str {
        match self {
            AdminCategory::Adv => "ADV",
            AdminCategory::Scv => "SCV",
        }
    }
}

impl fmt::Display for AdminCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AdminCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ADV" => Ok(AdminCategory::Adv),
            "SCV" => Ok(AdminCategory::Scv),
            other => Err(Error::invalid(format!(
                "admin_category must be ADV or SCV, got `{other}`"
            ))),
        }
    }
}

/// Share of slope-exceeding area in a village zone.
pub fn compute_sgi(slope: &RasterGrid, mask: &ZoneMask, threshold: f64) -> Result<f64> {
    zone_fraction_above(slope, mask, threshold)
}

/// Share of high-insolation area in a village zone.
pub fn compute_srei(insolation: &RasterGrid, mask: &ZoneMask, threshold: f64) -> Result<f64> {
    zone_fraction_above(insolation, mask, threshold)
}

/// Road surface shares of a village path network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceComposition {
    pub paved_share: f64,
    pub hardened_share: f64,
    pub rough_share: f64,
}

impl SurfaceComposition {
    pub fn new(paved_share: f64, hardened_share: f64, rough_share: f64) -> Result<Self> {
        let comp = Self {
            paved_share,
            hardened_share,
            rough_share,
        };
        comp.validate()?;
        Ok(comp)
    }

    pub fn validate(&self) -> Result<()> {
        let shares = [self.paved_share, self.hardened_share, self.rough_share];
        if shares.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::invalid(format!(
                "surface shares must each lie in [0, 1], got {shares:?}"
            )));
        }
        let total: f64 = shares.iter().sum();
        if (total - 1.0).abs() > SHARE_TOLERANCE {
            return Err(Error::invalid(format!(
                "surface shares must sum to 1, got {total}"
            )));
        }
        Ok(())
    }
}

/// Per-surface walkability weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkWeights {
    pub paved: f64,
    pub hardened: f64,
    pub rough: f64,
}

impl Default for WalkWeights {
    fn default() -> Self {
        Self {
            paved: 1.0,
            hardened: 0.6,
            rough: 0.3,
        }
    }
}

/// Walkability: surface shares weighted by surface quality.
pub fn compute_wi(comp: &SurfaceComposition, weights: &WalkWeights) -> Result<f64> {
    comp.validate()?;
    Ok(comp.paved_share * weights.paved
        + comp.hardened_share * weights.hardened
        + comp.rough_share * weights.rough)
}

/// Labor weights for crop classes.
pub const CROP_LABOR_WEIGHTS: [f64; 3] = [1.0, 0.6, 0.3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CropComponent {
    /// 1.0 manual cash crop, 0.6 orchard, 0.3 mechanized.
    pub labor_weight: f64,
    pub area_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropSystem {
    pub components: Vec<CropComponent>,
    /// Fraction of annual field-labor hours that fall in the peak window.
    pub temporal_concentration: f64,
    /// Agricultural workers over resident labor force.
    pub labor_share: f64,
}

impl CropSystem {
    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::invalid("crop system has no components"));
        }
        for c in &self.components {
            if !CROP_LABOR_WEIGHTS
                .iter()
                .any(|w| (w - c.labor_weight).abs() <= SHARE_TOLERANCE)
            {
                return Err(Error::invalid(format!(
                    "crop labor weight must be one of 1.0, 0.6, 0.3, got {}",
                    c.labor_weight
                )));
            }
            if !(0.0..=1.0).contains(&c.area_share) {
                return Err(Error::invalid(format!(
                    "crop area share {} outside [0, 1]",
                    c.area_share
                )));
            }
        }
        let total: f64 = self.components.iter().map(|c| c.area_share).sum();
        if (total - 1.0).abs() > SHARE_TOLERANCE {
            return Err(Error::invalid(format!(
                "crop area shares must sum to 1, got {total}"
            )));
        }
        for (name, v) in [
            ("temporal_concentration", self.temporal_concentration),
            ("labor_share", self.labor_share),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Agricultural intensity: area-weighted crop labor weight times temporal
/// concentration times agricultural labor share.
pub fn compute_aii(crop: &CropSystem) -> Result<f64> {
    crop.validate()?;
    let labor: f64 = crop
        .components
        .iter()
        .map(|c| c.labor_weight * c.area_share)
        .sum();
    Ok(labor * crop.temporal_concentration * crop.labor_share)
}

/// One row of the township stress table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VillageIndices {
    pub village_id: String,
    pub name: String,
    pub admin_category: AdminCategory,
    pub sgi: f64,
    pub srei: f64,
    pub wi: f64,
    pub aii: f64,
}

impl VillageIndices {
    pub fn values(&self) -> [f64; 4] {
        [self.sgi, self.srei, self.wi, self.aii]
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("SGI", self.sgi, 0.0, 1.0),
            ("SREI", self.srei, 0.0, 1.0),
            ("WI", self.wi, 0.3, 1.0),
            ("AII", self.aii, 0.0, 1.0),
        ];
        for (label, v, lo, hi) in checks {
            if !v.is_finite() || v < lo - SHARE_TOLERANCE || v > hi + SHARE_TOLERANCE {
                return Err(Error::invalid(format!(
                    "{label} for {} is {v}, expected a value in [{lo}, {hi}]",
                    self.village_id
                )));
            }
        }
        Ok(())
    }
}

/// Validates village records and orders them by id into a stress matrix.
pub fn assemble_stress_table(records: &[VillageIndices]) -> Result<StressMatrix> {
    if records.len() < 2 {
        return Err(Error::invalid(format!(
            "stress table needs at least 2 villages, got {}",
            records.len()
        )));
    }
    let mut seen = BTreeSet::new();
    for r in records {
        if !seen.insert(r.village_id.as_str()) {
            return Err(Error::invalid(format!(
                "duplicate village_id {}",
                r.village_id
            )));
        }
        r.validate()?;
    }
    let mut sorted: Vec<&VillageIndices> = records.iter().collect();
    sorted.sort_by(|a, b| a.village_id.cmp(&b.village_id));
    StressMatrix::new(
        sorted.iter().map(|r| r.village_id.clone()).collect(),
        sorted.iter().map(|r| r.values()).collect(),
        sorted.iter().map(|r| r.admin_category).collect(),
    )
}

/// Share of villages with AII at or above `threshold`.
pub fn aii_share_at_least(records: &[VillageIndices], threshold: f64) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().filter(|r| r.aii >= threshold).count() as f64 / records.len() as f64
}
