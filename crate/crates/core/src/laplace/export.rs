use super::{FieldMap, Grid};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::{self, Write};

/// Sidecar metadata for CSV array exports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub x0: f64,
    pub y0: f64,
    pub quantity: String,
    pub unit: String,
}

impl GridMetadata {
    pub fn new(grid: &Grid, quantity: &str, unit: &str) -> Self {
        GridMetadata {
            nx: grid.nx,
            ny: grid.ny,
            h: grid.h,
            x0: grid.origin.x,
            y0: grid.origin.y,
            quantity: quantity.into(),
            unit: unit.into(),
        }
    }

    fn header(&self) -> String {
        format!(
            "# {} [{}] nx={} ny={} h={} x0={} y0={} rows=y cols=x\n",
            self.quantity, self.unit, self.nx, self.ny, self.h, self.x0, self.y0
        )
    }
}

/// Row-major CSV (one row per `y`, `nx+1` columns) with a metadata header line.
pub fn potential_csv(values: &[f64], grid: &Grid, quantity: &str, unit: &str) -> String {
    let meta = GridMetadata::new(grid, quantity, unit);
    let mut s = meta.header();
    for j in 0..=grid.ny {
        let row = &values[grid.idx(0, j)..=grid.idx(grid.nx, j)];
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            write!(s, "{v}").unwrap();
        }
        s.push('\n');
    }
    s
}

/// `x,y,ex,ey` rows for every node.
pub fn write_field_csv<W: Write>(field: &FieldMap, mut out: W) -> io::Result<()> {
    let g = field.grid;
    out.write_all(GridMetadata::new(&g, "electric field", "V/m").header().as_bytes())?;
    writeln!(out, "x,y,ex,ey")?;
    for j in 0..=g.ny {
        for i in 0..=g.nx {
            let p = g.idx(i, j);
            writeln!(out, "{},{},{},{}", g.x(i), g.y(j), field.ex[p], field.ey[p])?;
        }
    }
    Ok(())
}
