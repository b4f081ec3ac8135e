//! Simplified clear-sky daily insolation over a DEM.
//!
//! For each time step of the day the sun position comes from a
//! declination / hour-angle model in local solar time. A cell receives
//!
//! * beam: `(1 - diffuse_fraction) * I0 * max(0, n·s)` while the sun is
//!   above the terrain horizon in its azimuth sector, where `n` is the
//!   Horn surface normal and `s` the unit sun vector;
//! * diffuse: `diffuse_fraction * I0 * sin(altitude) * svf`, with the sky
//!   view factor `svf` the mean of `cos²(h)` over the horizon sectors.
//!
//! `I0` is the direct normal irradiance in kJ·m⁻²·h⁻¹, so summing over the
//! day at `time_step` hours yields kJ·m⁻²·day⁻¹. The model targets ranking
//! fidelity for threshold fractions, not radiometric accuracy.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{horn_gradient, RasterGrid, DEFAULT_NODATA};
use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolarParams {
    /// Degrees north, in [-90, 90].
    pub latitude: f64,
    /// 1..=366.
    pub day_of_year: u32,
    /// kJ·m⁻²·h⁻¹.
    pub direct_normal_irradiance: f64,
    /// Share of flux treated as isotropic diffuse, in [0, 1].
    pub diffuse_fraction: f64,
    /// Number of azimuth sectors for horizon search, at least 8.
    pub horizon_directions: usize,
    /// Integration step in hours.
    pub time_step: f64,
    /// Maximum horizon search distance in meters.
    pub search_radius: f64,
}

impl Default for SolarParams {
    fn default() -> Self {
        Self {
            latitude: 35.6,
            day_of_year: 172,
            // 3000 kJ/m²/h ≈ 833 W/m²: a flat open cell on the equator at the
            // June solstice integrates to ~21,000 kJ/m²/day
            direct_normal_irradiance: 3000.0,
            diffuse_fraction: 0.3,
            horizon_directions: 32,
            time_step: 0.5,
            search_radius: 2000.0,
        }
    }
}

impl SolarParams {
    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(Error::invalid(format!(
                "latitude {} outside [-90, 90]",
                self.latitude
            )));
        }
        if !(1..=366).contains(&self.day_of_year) {
            return Err(Error::invalid(format!(
                "day_of_year {} outside [1, 366]",
                self.day_of_year
            )));
        }
        if !(self.direct_normal_irradiance.is_finite() && self.direct_normal_irradiance >= 0.0) {
            return Err(Error::invalid(
                "direct_normal_irradiance must be finite and >= 0",
            ));
        }
        if !(0.0..=1.0).contains(&self.diffuse_fraction) {
            return Err(Error::invalid("diffuse_fraction must lie in [0, 1]"));
        }
        if self.horizon_directions < 8 {
            return Err(Error::invalid("horizon_directions must be at least 8"));
        }
        if !(self.time_step.is_finite() && self.time_step > 0.0 && self.time_step <= 24.0) {
            return Err(Error::invalid("time_step must lie in (0, 24] hours"));
        }
        if !(self.search_radius.is_finite() && self.search_radius >= 0.0) {
            return Err(Error::invalid("search_radius must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Sun position for one integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SunSample {
    /// Radians above the horizontal.
    pub altitude: f64,
    /// Radians clockwise from north.
    pub azimuth: f64,
    /// Hours represented by this sample.
    pub hours: f64,
}

impl SunSample {
    /// Unit vector toward the sun in (east, north, up).
    pub fn direction(&self) -> [f64; 3] {
        let (sa, ca) = self.altitude.sin_cos();
        [ca * self.azimuth.sin(), ca * self.azimuth.cos(), sa]
    }
}

/// Solar declination in radians (Cooper's approximation).
pub fn declination(day_of_year: u32) -> f64 {
    23.45f64.to_radians() * (TAU * (284.0 + day_of_year as f64) / 365.0).sin()
}

/// Sun samples at the midpoint of each step across 24 solar hours. Only
/// samples with the sun above the astronomical horizon are returned.
pub fn sun_path(params: &SolarParams) -> Vec<SunSample> {
    let lat = params.latitude.to_radians();
    let decl = declination(params.day_of_year);
    let (sl, cl) = lat.sin_cos();
    let (sd, cd) = decl.sin_cos();
    let steps = (24.0 / params.time_step).ceil() as usize;
    (0..steps)
        .filter_map(|i| {
            let start = i as f64 * params.time_step;
            let hours = params.time_step.min(24.0 - start);
            let t = start + hours / 2.0;
            let omega = (15.0 * (t - 12.0)).to_radians();
            let sin_alt = sl * sd + cl * cd * omega.cos();
            if sin_alt <= 0.0 {
                return None;
            }
            let altitude = sin_alt.clamp(-1.0, 1.0).asin();
            let azimuth = (-cd * omega.sin())
                .atan2(sd * cl - cd * sl * omega.cos())
                .rem_euclid(TAU);
            Some(SunSample {
                altitude,
                azimuth,
                hours,
            })
        })
        .collect()
}

/// Horizon elevation angle (radians, clamped at 0) in each of
/// `params.horizon_directions` azimuth sectors around a cell, found by
/// marching one cell length at a time along each sector's central ray.
pub fn horizon_angles(dem: &RasterGrid, row: usize, col: usize, params: &SolarParams) -> Vec<f64> {
    let z0 = dem.value(row, col);
    let max_steps = (params.search_radius / dem.cellsize).floor() as usize;
    let dirs = params.horizon_directions;
    (0..dirs)
        .map(|d| {
            let phi = TAU * d as f64 / dirs as f64;
            let (dc, dr) = (phi.sin(), -phi.cos());
            let mut best = 0.0f64;
            for step in 1..=max_steps {
                let t = step as f64;
                let r = (row as f64 + t * dr).round();
                let c = (col as f64 + t * dc).round();
                if r < 0.0 || c < 0.0 || r >= dem.nrows as f64 || c >= dem.ncols as f64 {
                    break;
                }
                let Some(z) = dem.get(r as usize, c as usize) else {
                    continue;
                };
                let angle = ((z - z0) / (t * dem.cellsize)).atan();
                best = best.max(angle);
            }
            best
        })
        .collect()
}

/// Unit surface normal (east, north, up) from a gradient.
pub fn surface_normal(dzdx: f64, dzdy: f64) -> [f64; 3] {
    let norm = (1.0 + dzdx * dzdx + dzdy * dzdy).sqrt();
    [-dzdx / norm, -dzdy / norm, 1.0 / norm]
}

/// Sector index of an azimuth for `dirs` sectors centered on multiples of
/// `2π/dirs`.
#[inline]
fn sector(azimuth: f64, dirs: usize) -> usize {
    ((azimuth / TAU * dirs as f64).round() as usize) % dirs
}

/// Daily insolation (kJ·m⁻²) for one cell given its surface normal and
/// per-sector horizon angles.
pub fn cell_insolation(
    normal: [f64; 3],
    horizons: &[f64],
    path: &[SunSample],
    params: &SolarParams,
) -> f64 {
    let dirs = horizons.len();
    let svf = horizons.iter().map(|h| h.cos().powi(2)).sum::<f64>() / dirs as f64;
    let i0 = params.direct_normal_irradiance;
    let f = params.diffuse_fraction;
    path.iter()
        .map(|sun| {
            let s = sun.direction();
            let visible = sun.altitude > horizons[sector(sun.azimuth, dirs)];
            let cos_i = normal[0] * s[0] + normal[1] * s[1] + normal[2] * s[2];
            let beam = if visible {
                (1.0 - f) * i0 * cos_i.max(0.0)
            } else {
                0.0
            };
            let diffuse = f * i0 * s[2] * svf;
            (beam + diffuse) * sun.hours
        })
        .sum()
}

/// Daily insolation in kJ·m⁻²·day⁻¹ for every cell of `dem`.
pub fn daily_insolation(dem: &RasterGrid, params: &SolarParams) -> Result<RasterGrid> {
    daily_insolation_with(dem, params, Execution::default())
}

pub fn daily_insolation_with(
    dem: &RasterGrid,
    params: &SolarParams,
    exec: Execution,
) -> Result<RasterGrid> {
    params.validate()?;
    let nodata = if dem.nodata >= 0.0 {
        DEFAULT_NODATA
    } else {
        dem.nodata
    };
    let path = sun_path(params);
    let ncols = dem.ncols;
    let cells = exec.map_range(dem.len(), |i| {
        let (row, col) = (i / ncols, i % ncols);
        match horn_gradient(dem, row, col) {
            Some((dx, dy)) => {
                let horizons = horizon_angles(dem, row, col, params);
                cell_insolation(surface_normal(dx, dy), &horizons, &path, params)
            }
            None => nodata,
        }
    });
    Ok(dem.derive(cells, nodata))
}

/// Integral of `sin(altitude)` over the day in hours, closed form. Used to
/// cross-check the step integration on open flat ground.
pub fn flat_daily_hours(latitude_deg: f64, day_of_year: u32) -> f64 {
    let lat = latitude_deg.to_radians();
    let decl = declination(day_of_year);
    let a = lat.sin() * decl.sin();
    let b = lat.cos() * decl.cos();
    let cos_ws = if b == 0.0 { f64::NAN } else { -a / b };
    let ws = if cos_ws.is_nan() || cos_ws >= 1.0 {
        if a > 0.0 {
            PI
        } else {
            0.0
        }
    } else if cos_ws <= -1.0 {
        PI
    } else {
        cos_ws.acos()
    };
    (24.0 / PI) * (ws * a + b * ws.sin())
}
