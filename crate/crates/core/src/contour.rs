//! Marching-squares iso-lines on a grid and their CSV export.

use crate::geometry::Point;
use crate::laplace::Grid;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

/// A straight piece of an iso-line.
pub type Segment = [Point; 2];

/// Iso-line segments of `values` at `level`. Cells with a non-finite corner
/// or a corner rejected by `keep` are skipped. Saddle cells are resolved with
/// the cell-centre average.
pub fn marching_squares(grid: &Grid, values: &[f64], level: f64, keep: impl Fn(usize) -> bool) -> Vec<Segment> {
    let mut out = Vec::new();
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let idx = [grid.idx(i, j), grid.idx(i + 1, j), grid.idx(i + 1, j + 1), grid.idx(i, j + 1)];
            if idx.iter().any(|&p| !values[p].is_finite() || !keep(p)) {
                continue;
            }
            let v = idx.map(|p| values[p] - level);
            let pos = [grid.node(i, j), grid.node(i + 1, j), grid.node(i + 1, j + 1), grid.node(i, j + 1)];
            let mut case = 0;
            for (k, &vk) in v.iter().enumerate() {
                if vk > 0.0 {
                    case |= 1 << k;
                }
            }
            // Crossing point on edge k (between corner k and k+1).
            let cross = |k: usize| {
                let (a, b) = (k, (k + 1) % 4);
                let t = v[a] / (v[a] - v[b]);
                Point::new(pos[a].x + t * (pos[b].x - pos[a].x), pos[a].y + t * (pos[b].y - pos[a].y))
            };
            let pairs: &[(usize, usize)] = match case {
                0 | 15 => &[],
                1 | 14 => &[(3, 0)],
                2 | 13 => &[(0, 1)],
                3 | 12 => &[(3, 1)],
                4 | 11 => &[(1, 2)],
                6 | 9 => &[(0, 2)],
                7 | 8 => &[(2, 3)],
                5 | 10 => {
                    let centre = v.iter().sum::<f64>() / 4.0;
                    // corners 0 and 2 share a sign in case 5, 1 and 3 in case 10
                    let joined = (centre > 0.0) == (case == 5);
                    if joined {
                        &[(3, 2), (0, 1)]
                    } else {
                        &[(3, 0), (1, 2)]
                    }
                }
                _ => unreachable!(),
            };
            for &(a, b) in pairs {
                out.push([cross(a), cross(b)]);
            }
        }
    }
    out
}

/// `n` levels spaced geometrically from `lo` to `hi` (both > 0).
pub fn geometric_levels(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let r = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n).map(|k| lo * r.powi(k as i32)).collect()
}

/// Levels for a non-negative field: geometric from `floor·max` up to `cap·max`.
pub fn capped_levels(values: &[f64], n: usize, floor: f64, cap: f64) -> Vec<f64> {
    let max = values.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    geometric_levels(floor * max, cap * max, n)
}

/// `x,y,value` rows, two per segment.
pub fn contour_csv(lines: &[(f64, Vec<Segment>)]) -> String {
    let mut s = String::from("x,y,value\n");
    for (level, segs) in lines {
        for [a, b] in segs {
            writeln!(s, "{},{},{level}", a.x, a.y).unwrap();
            writeln!(s, "{},{},{level}", b.x, b.y).unwrap();
        }
    }
    s
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContourError {
    #[error("field has no finite values to contour")]
    EmptyField,
    #[error("level policy needs count >= 2, cap > 0 and floor in (0, 1)")]
    BadPolicy,
}

/// Geometric levels measured up from the field minimum; values above `cap`
/// are left uncontoured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPolicy {
    pub count: usize,
    pub cap: f64,
    /// Lowest level as a fraction of `cap`.
    pub floor: f64,
}

/// Iso-lines of `values − min(values)` under `policy`, keyed by level.
pub fn export_contours(
    grid: &Grid,
    values: &[f64],
    keep: impl Fn(usize) -> bool,
    policy: LevelPolicy,
) -> Result<Vec<(f64, Vec<Segment>)>, ContourError> {
    if policy.count < 2 || !(policy.cap > 0.0) || !(policy.floor > 0.0 && policy.floor < 1.0) {
        return Err(ContourError::BadPolicy);
    }
    let min = (0..values.len())
        .filter(|&p| keep(p) && values[p].is_finite())
        .map(|p| values[p])
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(ContourError::EmptyField);
    }
    let shifted: Vec<f64> = values.iter().map(|v| v - min).collect();
    Ok(geometric_levels(policy.floor * policy.cap, policy.cap, policy.count)
        .into_iter()
        .map(|l| (l, marching_squares(grid, &shifted, l, &keep)))
        .collect())
}

/// Distance from `centre` along direction `angle` to the nearest segment it
/// crosses.
pub fn ray_hit(segments: &[Segment], centre: Point, angle: f64) -> Option<f64> {
    let (dx, dy) = (angle.cos(), angle.sin());
    let mut best: Option<f64> = None;
    for [a, b] in segments {
        let (ex, ey) = (b.x - a.x, b.y - a.y);
        let den = dx * ey - dy * ex;
        if den.abs() < 1e-300 {
            continue;
        }
        let (wx, wy) = (a.x - centre.x, a.y - centre.y);
        let t = (wx * ey - wy * ex) / den;
        let u = (wx * dy - wy * dx) / den;
        if t > 0.0 && (0.0..=1.0).contains(&u) {
            best = Some(best.map_or(t, |b: f64| b.min(t)));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_radius_from_rays() {
        let grid = Grid::new(100, 100, 0.02, Point::new(-1.0, -1.0)).unwrap();
        let vals: Vec<f64> = (0..grid.len())
            .map(|p| {
                let (i, j) = grid.ij(p);
                grid.x(i).hypot(grid.y(j))
            })
            .collect();
        let segs = marching_squares(&grid, &vals, 0.5, |_| true);
        for k in 0..16 {
            let r = ray_hit(&segs, Point::new(0.0, 0.0), k as f64 * std::f64::consts::PI / 8.0).unwrap();
            assert!((r - 0.5).abs() < 1e-3, "{r}");
        }
    }

    #[test]
    fn levels_are_geometric() {
        let l = geometric_levels(1e-3, 1.0, 4);
        assert!((l[1] / l[0] - 10.0).abs() < 1e-9 && (l[3] - 1.0).abs() < 1e-12);
    }
}
