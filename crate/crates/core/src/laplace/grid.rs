use crate::geometry::{CrossSectionGeometry, Point};
use serde::{Deserialize, Serialize};

use super::LaplaceError;

/// Uniform node lattice. `nx`, `ny` count cells, so there are
/// `(nx+1)·(ny+1)` nodes; node `(i, j)` sits at `origin + (i·h, j·h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: Point,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, h: f64, origin: Point) -> Result<Grid, LaplaceError> {
        if nx < 16 || ny < 16 {
            return Err(LaplaceError::GridTooSmall(nx, ny));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(LaplaceError::BadSpacing(h));
        }
        Ok(Grid { nx, ny, h, origin })
    }

    /// Box around the geometry with at least `margin_d·d` on every side.
    /// Edges are snapped to multiples of `h·2^levels` so that the grid can be
    /// coarsened `levels` times and mirror-symmetric geometries get
    /// mirror-symmetric grids.
    pub fn for_geometry(
        g: &CrossSectionGeometry,
        h: f64,
        margin_d: f64,
        levels: u32,
    ) -> Result<Grid, LaplaceError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(LaplaceError::BadSpacing(h));
        }
        if margin_d < 8.0 {
            return Err(LaplaceError::MarginTooSmall(margin_d));
        }
        let b = g.bounds();
        let m = margin_d * g.d;
        let big = h * f64::from(1u32 << levels);
        let x0 = ((b.x0 - m) / big).floor() * big;
        let x1 = ((b.x1 + m) / big).ceil() * big;
        let y0 = ((b.y0 - m) / big).floor() * big;
        let y1 = ((b.y1 + m) / big).ceil() * big;
        let nx = ((x1 - x0) / h).round() as usize;
        let ny = ((y1 - y0) / h).round() as usize;
        Grid::new(nx, ny, h, Point::new(x0, y0))
    }

    pub fn stride(&self) -> usize {
        self.nx + 1
    }

    pub fn len(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn ij(&self, p: usize) -> (usize, usize) {
        (p % (self.nx + 1), p / (self.nx + 1))
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        Point::new(self.origin.x + i as f64 * self.h, self.origin.y + j as f64 * self.h)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin.x + i as f64 * self.h
    }

    pub fn y(&self, j: usize) -> f64 {
        self.origin.y + j as f64 * self.h
    }

    pub fn on_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx || j == self.ny
    }

    /// Cell containing `p` and the fractional offsets inside it.
    pub fn locate(&self, p: Point) -> Option<(usize, usize, f64, f64)> {
        let u = (p.x - self.origin.x) / self.h;
        let v = (p.y - self.origin.y) / self.h;
        if !(u >= 0.0 && v >= 0.0 && u <= self.nx as f64 && v <= self.ny as f64) {
            return None;
        }
        let i = (u.floor() as usize).min(self.nx - 1);
        let j = (v.floor() as usize).min(self.ny - 1);
        Some((i, j, u - i as f64, v - j as f64))
    }

    /// Nearest node to `p`, clamped into the grid.
    pub fn nearest(&self, p: Point) -> (usize, usize) {
        let u = ((p.x - self.origin.x) / self.h).round().clamp(0.0, self.nx as f64);
        let v = ((p.y - self.origin.y) / self.h).round().clamp(0.0, self.ny as f64);
        (u as usize, v as usize)
    }

    /// Same box at twice the spacing, if the cell counts allow it.
    pub fn coarsen(&self) -> Option<Grid> {
        if self.nx % 2 != 0 || self.ny % 2 != 0 || self.nx / 2 < 16 || self.ny / 2 < 16 {
            return None;
        }
        Some(Grid { nx: self.nx / 2, ny: self.ny / 2, h: self.h * 2.0, origin: self.origin })
    }
}
