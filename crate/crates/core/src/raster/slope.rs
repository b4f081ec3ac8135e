use super::{RasterGrid, DEFAULT_NODATA};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Horn 3×3 gradient at a cell as `(dz/dx, dz/dy)` with x east and y
/// north. Neighbors outside the grid are replaced by the nearest edge
/// cell. Returns `None` when the cell or any in-grid neighbor is nodata.
///
/// ```text
/// a b c
/// d e f      dz/dx = ((c + 2f + i) - (a + 2d + g)) / 8h
/// g h i      dz/dy = ((a + 2b + c) - (g + 2h + i)) / 8h
/// ```
pub fn horn_gradient(dem: &RasterGrid, row: usize, col: usize) -> Option<(f64, f64)> {
    dem.get(row, col)?;
    let last_r = dem.nrows - 1;
    let last_c = dem.ncols - 1;
    let rows = [row.saturating_sub(1), row, (row + 1).min(last_r)];
    let cols = [col.saturating_sub(1), col, (col + 1).min(last_c)];
    let mut w = [[0.0f64; 3]; 3];
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            w[i][j] = dem.get(r, c)?;
        }
    }
    let h8 = 8.0 * dem.cellsize;
    let dzdx = ((w[0][2] + 2.0 * w[1][2] + w[2][2]) - (w[0][0] + 2.0 * w[1][0] + w[2][0])) / h8;
    let dzdy = ((w[0][0] + 2.0 * w[0][1] + w[0][2]) - (w[2][0] + 2.0 * w[2][1] + w[2][2])) / h8;
    Some((dzdx, dzdy))
}

/// Slope in degrees for every cell of an elevation grid.
pub fn slope_degrees(dem: &RasterGrid) -> Result<RasterGrid> {
    slope_degrees_with(dem, Execution::default())
}

pub fn slope_degrees_with(dem: &RasterGrid, exec: Execution) -> Result<RasterGrid> {
    if dem.ncols == 0 || dem.nrows == 0 {
        return Err(Error::invalid("slope needs at least a 1x1 grid"));
    }
    // slopes live in [0, 90); keep the sentinel out of that range
    let nodata = if (0.0..=90.0).contains(&dem.nodata) {
        DEFAULT_NODATA
    } else {
        dem.nodata
    };
    let ncols = dem.ncols;
    let cells = exec.map_range(dem.len(), |i| {
        match horn_gradient(dem, i / ncols, i % ncols) {
            Some((dx, dy)) => dx.hypot(dy).atan().to_degrees(),
            None => nodata,
        }
    });
    Ok(dem.derive(cells, nodata))
}
