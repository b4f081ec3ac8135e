use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classify::{DEFAULT_KMAX, DEFAULT_KMIN};
use crate::error::{Error, Result};
use crate::indices::{WalkWeights, DEFAULT_SLOPE_THRESHOLD, DEFAULT_SREI_THRESHOLD};
use crate::raster::SolarParams;

pub const DEFAULT_CHOSEN_K: usize = 4;

/// Inclusive range of cluster counts, written `a..b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct KRange {
    pub min: usize,
    pub max: usize,
}

impl Default for KRange {
    fn default() -> Self {
        Self {
            min: DEFAULT_KMIN,
            max: DEFAULT_KMAX,
        }
    }
}

impl fmt::Display for KRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.min, self.max)
    }
}

impl FromStr for KRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("k range must look like `2..16`, got `{s}`"));
        let (a, b) = s.trim().split_once("..").ok_or_else(bad)?;
        let b = b.strip_prefix('=').unwrap_or(b);
        let min = a.trim().parse().map_err(|_| bad())?;
        let max = b.trim().parse().map_err(|_| bad())?;
        if min < 2 || min > max {
            return Err(Error::Config(format!(
                "k range {min}..{max} must satisfy 2 <= min <= max"
            )));
        }
        Ok(Self { min, max })
    }
}

impl TryFrom<String> for KRange {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<KRange> for String {
    fn from(k: KRange) -> String {
        k.to_string()
    }
}

/// Run configuration. Relative input paths resolve against the directory
/// holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// `id,name,admin_category[,sgi,srei,wi,aii]`
    pub villages: Option<PathBuf>,
    /// `id,paved_share,hardened_share,rough_share`
    pub surfaces: Option<PathBuf>,
    /// One row per crop: `id,labor_weight,area_share,temporal_concentration,labor_share`
    pub crops: Option<PathBuf>,
    /// `id,dem,mask`
    pub rasters: Option<PathBuf>,
    /// `village_id,cluster`, used to number spatial clusters in reports.
    pub reference_clusters: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub slope_threshold: f64,
    pub srei_threshold: f64,
    pub wi_weights: WalkWeights,
    pub solar: SolarParams,
    pub k_range: KRange,
    pub chosen_k: usize,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            villages: None,
            surfaces: None,
            crops: None,
            rasters: None,
            reference_clusters: None,
            out: None,
            slope_threshold: DEFAULT_SLOPE_THRESHOLD,
            srei_threshold: DEFAULT_SREI_THRESHOLD,
            wi_weights: WalkWeights::default(),
            solar: SolarParams::default(),
            k_range: KRange::default(),
            chosen_k: DEFAULT_CHOSEN_K,
            base_dir: PathBuf::from("."),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, base)
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = dir.into();
        self
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Output directory, `out` next to the config when unset.
    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| self.base_dir.join("out"))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.slope_threshold > 0.0 && self.slope_threshold < 90.0) {
            return Err(Error::Config(format!(
                "slope_threshold must lie in (0, 90) degrees, got {}",
                self.slope_threshold
            )));
        }
        if !(self.srei_threshold.is_finite() && self.srei_threshold > 0.0) {
            return Err(Error::Config(format!(
                "srei_threshold must be positive, got {}",
                self.srei_threshold
            )));
        }
        let w = &self.wi_weights;
        if [w.paved, w.hardened, w.rough]
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(Error::Config(
                "wi_weights must be finite and non-negative".into(),
            ));
        }
        self.solar.validate()?;
        if self.chosen_k < 2 {
            return Err(Error::Config(format!(
                "chosen_k must be >= 2, got {}",
                self.chosen_k
            )));
        }
        if self.k_range.min < 2 || self.k_range.min > self.k_range.max {
            return Err(Error::Config(format!("invalid k_range {}", self.k_range)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty_file() {
        let c = PipelineConfig::from_toml("", "/tmp").unwrap();
        assert_eq!(c.slope_threshold, 4.8);
        assert_eq!(c.srei_threshold, 20000.0);
        assert_eq!(c.k_range, KRange { min: 2, max: 16 });
        assert_eq!(c.chosen_k, 4);
        assert_eq!(c.out_dir(), PathBuf::from("/tmp/out"));
        c.validate().unwrap();
    }

    #[test]
    fn parses_nested_tables() {
        let c = PipelineConfig::from_toml(
            r#"
            villages = "v.csv"
            k_range = "2..8"
            [wi_weights]
            rough = 0.2
            [solar]
            latitude = 30.0
            "#,
            "base",
        )
        .unwrap();
        assert_eq!(
            c.resolve(c.villages.as_ref().unwrap()),
            PathBuf::from("base/v.csv")
        );
        assert_eq!(c.k_range.max, 8);
        assert_eq!(c.wi_weights.paved, 1.0);
        assert_eq!(c.wi_weights.rough, 0.2);
        assert_eq!(c.solar.latitude, 30.0);
        assert_eq!(c.solar.day_of_year, 172);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_ranges() {
        assert!(PipelineConfig::from_toml("colour = 1", ".").is_err());
        assert!(PipelineConfig::from_toml("k_range = \"1..4\"", ".").is_err());
        assert!(PipelineConfig::from_toml("k_range = \"5..4\"", ".").is_err());
        assert!("2..=6".parse::<KRange>().is_ok());
        let c = PipelineConfig::from_toml("slope_threshold = -1.0", ".").unwrap();
        assert!(c.validate().is_err());
    }
}
