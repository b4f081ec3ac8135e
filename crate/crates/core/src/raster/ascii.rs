//! ESRI ASCII grid reader/writer.
//!
//! ```text
//! ncols         4
//! nrows         3
//! xllcorner     500000
//! yllcorner     3900000
//! cellsize      10
//! NODATA_value  -9999
//! 1 2 3 4
//! ...
//! ```

use std::fmt::Write as _;

use super::RasterGrid;
use crate::error::{Error, Result};

const REQUIRED: [&str; 6] = [
    "ncols",
    "nrows",
    "xllcorner",
    "yllcorner",
    "cellsize",
    "NODATA_value",
];

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn tokens(line_no: usize, line: &str) -> impl Iterator<Item = Token<'_>> {
    let mut rest = line;
    let mut offset = 0;
    std::iter::from_fn(move || {
        let start = rest.find(|c: char| !c.is_whitespace())?;
        let tail = &rest[start..];
        let len = tail.find(char::is_whitespace).unwrap_or(tail.len());
        let tok = Token {
            text: &tail[..len],
            line: line_no,
            column: offset + start + 1,
        };
        offset += start + len;
        rest = &tail[len..];
        Some(tok)
    })
}

fn parse_err(tok: &Token<'_>, message: impl Into<String>) -> Error {
    Error::Parse {
        line: tok.line,
        column: tok.column,
        message: message.into(),
    }
}

fn looks_numeric(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_digit() || matches!(c, '-' | '+' | '.'))
}

#[derive(Default)]
struct Header {
    ncols: Option<usize>,
    nrows: Option<usize>,
    x: Option<(f64, bool)>,
    y: Option<(f64, bool)>,
    cellsize: Option<f64>,
    nodata: Option<f64>,
}

/// Parses an ESRI ASCII grid. All six header keys are required
/// (`xllcenter`/`yllcenter` are accepted in place of the corner keys).
pub fn parse_ascii_grid(text: &str) -> Result<RasterGrid> {
    let mut header = Header::default();
    let mut lines = text.lines().enumerate().peekable();

    while let Some(&(idx, line)) = lines.peek() {
        let mut toks = tokens(idx + 1, line);
        let Some(key) = toks.next() else {
            lines.next();
            continue;
        };
        if looks_numeric(key.text) {
            break;
        }
        lines.next();
        let value = toks
            .next()
            .ok_or_else(|| parse_err(&key, format!("header key `{}` has no value", key.text)))?;
        if let Some(extra) = toks.next() {
            return Err(parse_err(&extra, "unexpected token after header value"));
        }
        let num = || -> Result<f64> {
            value
                .text
                .parse::<f64>()
                .map_err(|_| parse_err(&value, format!("`{}` is not a number", value.text)))
        };
        let count = || -> Result<usize> {
            match value.text.parse::<usize>() {
                Ok(n) if n > 0 => Ok(n),
                _ => Err(parse_err(
                    &value,
                    format!("`{}` is not a positive integer", value.text),
                )),
            }
        };
        let lower = key.text.to_ascii_lowercase();
        let slot_taken = match lower.as_str() {
            "ncols" => header.ncols.replace(count()?).is_some(),
            "nrows" => header.nrows.replace(count()?).is_some(),
            "xllcorner" => header.x.replace((num()?, false)).is_some(),
            "xllcenter" => header.x.replace((num()?, true)).is_some(),
            "yllcorner" => header.y.replace((num()?, false)).is_some(),
            "yllcenter" => header.y.replace((num()?, true)).is_some(),
            "cellsize" => header.cellsize.replace(num()?).is_some(),
            "nodata_value" => header.nodata.replace(num()?).is_some(),
            _ => {
                return Err(parse_err(
                    &key,
                    format!("unknown header key `{}`", key.text),
                ))
            }
        };
        if slot_taken {
            return Err(parse_err(
                &key,
                format!("duplicate header key `{}`", key.text),
            ));
        }
    }

    let present = [
        header.ncols.is_some(),
        header.nrows.is_some(),
        header.x.is_some(),
        header.y.is_some(),
        header.cellsize.is_some(),
        header.nodata.is_some(),
    ];
    if let Some(i) = present.iter().position(|p| !p) {
        return Err(Error::MissingHeader(REQUIRED[i].to_string()));
    }
    let (ncols, nrows) = (header.ncols.unwrap(), header.nrows.unwrap());
    let cellsize = header.cellsize.unwrap();
    let nodata = header.nodata.unwrap();
    let expected = ncols * nrows;

    let mut cells = Vec::with_capacity(expected);
    let mut last = (1, 1);
    for (idx, line) in lines {
        last = (idx + 1, line.len() + 1);
        for tok in tokens(idx + 1, line) {
            if cells.len() == expected {
                return Err(parse_err(
                    &tok,
                    format!("more than the {expected} cells declared by the header"),
                ));
            }
            let v: f64 = tok
                .text
                .parse()
                .map_err(|_| parse_err(&tok, format!("`{}` is not a number", tok.text)))?;
            cells.push(v);
        }
    }
    if cells.len() != expected {
        return Err(Error::Parse {
            line: last.0,
            column: last.1,
            message: format!("expected {expected} cells, found {}", cells.len()),
        });
    }

    let half = cellsize / 2.0;
    let (x, x_center) = header.x.unwrap();
    let (y, y_center) = header.y.unwrap();
    let grid = RasterGrid::new(ncols, nrows, cellsize, cells)?
        .with_origin(
            if x_center { x - half } else { x },
            if y_center { y - half } else { y },
        )
        .with_nodata(nodata);
    Ok(grid)
}

pub(super) fn write_ascii_grid(grid: &RasterGrid) -> String {
    let mut out = String::with_capacity(grid.len() * 8 + 128);
    let _ = writeln!(out, "ncols         {}", grid.ncols);
    let _ = writeln!(out, "nrows         {}", grid.nrows);
    let _ = writeln!(out, "xllcorner     {}", grid.xllcorner);
    let _ = writeln!(out, "yllcorner     {}", grid.yllcorner);
    let _ = writeln!(out, "cellsize      {}", grid.cellsize);
    let _ = writeln!(out, "NODATA_value  {}", grid.nodata);
    for row in grid.cells().chunks(grid.ncols) {
        let mut first = true;
        for v in row {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}
