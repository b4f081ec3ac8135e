//! Gridded terrain layers: ASCII grid I/O, Horn slope, clear-sky daily
//! insolation with horizon shading, and zonal threshold fractions.

mod ascii;
mod slope;
pub mod solar;

pub use ascii::parse_ascii_grid;
pub use slope::{horn_gradient, slope_degrees, slope_degrees_with};
pub use solar::{daily_insolation, daily_insolation_with, SolarParams};

use crate::error::{Error, Result};

/// Default sentinel for missing cells.
pub const DEFAULT_NODATA: f64 = -9999.0;

/// A north-up rectangular grid stored row-major, row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterGrid {
    pub ncols: usize,
    pub nrows: usize,
    pub cellsize: f64,
    pub xllcorner: f64,
    pub yllcorner: f64,
    pub nodata: f64,
    cells: Vec<f64>,
}

impl RasterGrid {
    pub fn new(ncols: usize, nrows: usize, cellsize: f64, cells: Vec<f64>) -> Result<Self> {
        if ncols == 0 || nrows == 0 {
            return Err(Error::invalid(format!(
                "grid must be at least 1x1, got {ncols}x{nrows}"
            )));
        }
        if !(cellsize.is_finite() && cellsize > 0.0) {
            return Err(Error::invalid(format!(
                "cellsize must be positive, got {cellsize}"
            )));
        }
        if cells.len() != ncols * nrows {
            return Err(Error::invalid(format!(
                "expected {} cells for a {ncols}x{nrows} grid, got {}",
                ncols * nrows,
                cells.len()
            )));
        }
        Ok(Self {
            ncols,
            nrows,
            cellsize,
            xllcorner: 0.0,
            yllcorner: 0.0,
            nodata: DEFAULT_NODATA,
            cells,
        })
    }

    /// Builds a grid by evaluating `f(row, col)` for every cell.
    pub fn from_fn(
        ncols: usize,
        nrows: usize,
        cellsize: f64,
        f: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        let cells = (0..nrows)
            .flat_map(|r| (0..ncols).map(move |c| (r, c)))
            .map(|(r, c)| f(r, c))
            .collect();
        Self::new(ncols, nrows, cellsize, cells)
    }

    pub fn with_origin(mut self, xllcorner: f64, yllcorner: f64) -> Self {
        self.xllcorner = xllcorner;
        self.yllcorner = yllcorner;
        self
    }

    pub fn with_nodata(mut self, nodata: f64) -> Self {
        self.nodata = nodata;
        self
    }

    /// Same georeferencing, new cell values.
    pub(crate) fn derive(&self, cells: Vec<f64>, nodata: f64) -> Self {
        debug_assert_eq!(cells.len(), self.cells.len());
        Self {
            ncols: self.ncols,
            nrows: self.nrows,
            cellsize: self.cellsize,
            xllcorner: self.xllcorner,
            yllcorner: self.yllcorner,
            nodata,
            cells,
        }
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.ncols + col
    }

    /// Raw stored value, including the nodata sentinel.
    #[inline]
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.cells[self.index(row, col)]
    }

    /// Cell value, or `None` for nodata and out-of-range positions.
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        if row >= self.nrows || col >= self.ncols {
            return None;
        }
        let v = self.value(row, col);
        (!self.is_nodata(v)).then_some(v)
    }

    #[inline]
    pub fn is_nodata(&self, v: f64) -> bool {
        v == self.nodata || v.is_nan()
    }

    pub fn same_shape(&self, other: &RasterGrid) -> bool {
        self.ncols == other.ncols && self.nrows == other.nrows
    }

    /// Serializes as an ESRI ASCII grid. Values use shortest round-trip
    /// formatting, so parsing the output reproduces the grid bit for bit.
    pub fn to_ascii(&self) -> String {
        ascii::write_ascii_grid(self)
    }
}

/// The cells of a grid that belong to one village.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneMask {
    pub village_id: String,
    ncols: usize,
    nrows: usize,
    mask: Vec<bool>,
}

impl ZoneMask {
    pub fn new(
        village_id: impl Into<String>,
        ncols: usize,
        nrows: usize,
        mask: Vec<bool>,
    ) -> Result<Self> {
        let village_id = village_id.into();
        if mask.len() != ncols * nrows {
            return Err(Error::invalid(format!(
                "mask for {village_id} has {} cells, expected {}",
                mask.len(),
                ncols * nrows
            )));
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::EmptyZone(format!(
                "mask for {village_id} selects no cells"
            )));
        }
        Ok(Self {
            village_id,
            ncols,
            nrows,
            mask,
        })
    }

    /// Reads a 0/1 mask grid: any non-zero, non-nodata cell is inside.
    pub fn from_grid(village_id: impl Into<String>, grid: &RasterGrid) -> Result<Self> {
        let mask = grid
            .cells()
            .iter()
            .map(|&v| !grid.is_nodata(v) && v != 0.0)
            .collect();
        Self::new(village_id, grid.ncols, grid.nrows, mask)
    }

    /// A mask covering every cell of `grid`.
    pub fn full(village_id: impl Into<String>, grid: &RasterGrid) -> Self {
        Self {
            village_id: village_id.into(),
            ncols: grid.ncols,
            nrows: grid.nrows,
            mask: vec![true; grid.len()],
        }
    }

    pub fn from_fn(
        village_id: impl Into<String>,
        ncols: usize,
        nrows: usize,
        f: impl Fn(usize, usize) -> bool,
    ) -> Result<Self> {
        let mask = (0..nrows)
            .flat_map(|r| (0..ncols).map(move |c| (r, c)))
            .map(|(r, c)| f(r, c))
            .collect();
        Self::new(village_id, ncols, nrows, mask)
    }

    pub fn cells(&self) -> &[bool] {
        &self.mask
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn check_congruent(&self, grid: &RasterGrid) -> Result<()> {
        if self.ncols != grid.ncols || self.nrows != grid.nrows {
            return Err(Error::invalid(format!(
                "mask for {} is {}x{} but grid is {}x{}",
                self.village_id, self.ncols, self.nrows, grid.ncols, grid.nrows
            )));
        }
        Ok(())
    }
}

/// Fraction of masked, valid cells whose value is strictly greater than
/// `threshold`. Nodata cells count toward neither numerator nor
/// denominator.
pub fn zone_fraction_above(grid: &RasterGrid, mask: &ZoneMask, threshold: f64) -> Result<f64> {
    mask.check_congruent(grid)?;
    let (above, valid) = grid
        .cells()
        .iter()
        .zip(mask.cells())
        .filter(|&(&v, &m)| m && !grid.is_nodata(v))
        .fold((0usize, 0usize), |(a, n), (&v, _)| {
            (a + usize::from(v > threshold), n + 1)
        });
    if valid == 0 {
        return Err(Error::EmptyZone(format!(
            "no valid cells under mask for {}",
            mask.village_id
        )));
    }
    Ok(above as f64 / valid as f64)
}
