//! Scalar potential landscapes on the solver grid: minimum search, flood
//! depth and stationary-point census.

use crate::geometry::Point;
use crate::interp::{Bicubic, Sample};
use crate::laplace::{Discretization, Grid};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Values in joules with node masks for interpolation and escape.
pub struct Landscape<'a> {
    pub grid: Grid,
    pub values: &'a [f64],
    pub disc: &'a Discretization,
    /// Nodes below this height count as lost (substrate).
    pub floor_y: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationaryKind {
    Minimum,
    Maximum,
    Saddle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub position: Point,
    pub value: f64,
    pub kind: StationaryKind,
}

/// Outcome of the flood from a minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Escape {
    pub level: f64,
    pub point: Point,
    /// No interior saddle was found; the level is where the basin first
    /// touches an electrode, the substrate or the box.
    pub flagged: bool,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on level
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl<'a> Landscape<'a> {
    pub fn interp(&self) -> Bicubic<'_> {
        Bicubic::new(self.grid, self.values)
    }

    fn free(&self, p: usize) -> bool {
        !self.disc.is_fixed(p)
    }

    fn sink(&self, p: usize) -> bool {
        if self.disc.is_fixed(p) {
            return true;
        }
        match self.floor_y {
            Some(y) => self.grid.y(p / self.grid.stride()) < y,
            None => false,
        }
    }

    /// Interpolated sample, only where the whole stencil is off-electrode.
    pub fn sample(&self, p: Point) -> Option<Sample> {
        let b = self.interp();
        if !b.cell_ok(p, |q| self.free(q)) {
            return None;
        }
        b.sample(p)
    }

    /// Strict-ish local minima of the nodal values (no neighbour lower, at
    /// least one higher) among nodes accepted by `keep`.
    pub fn local_minima(&self, keep: impl Fn(Point) -> bool) -> Vec<(Point, f64)> {
        let g = self.grid;
        let s = g.stride();
        let mut out = Vec::new();
        for j in 2..g.ny - 1 {
            for i in 2..g.nx - 1 {
                let p = j * s + i;
                if self.sink(p) {
                    continue;
                }
                let v = self.values[p];
                let mut higher = false;
                let mut ok = true;
                for dj in [-1i64, 0, 1] {
                    for di in [-1i64, 0, 1] {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let q = (p as i64 + dj * s as i64 + di) as usize;
                        if self.sink(q) || self.values[q] < v {
                            ok = false;
                        } else if self.values[q] > v {
                            higher = true;
                        }
                    }
                }
                let pt = g.node(i, j);
                if ok && higher && keep(pt) {
                    out.push((pt, v));
                }
            }
        }
        out
    }

    /// Newton iteration on the interpolant's gradient. With `want_min`,
    /// steps that are not descent directions fall back to gradient descent.
    pub fn newton(&self, start: Point, want_min: bool, max_step: f64) -> Option<(Point, Sample)> {
        let mut x = start;
        let h = self.grid.h;
        for _ in 0..200 {
            let s = self.sample(x)?;
            let det = s.hxx * s.hyy - s.hxy * s.hxy;
            let mut dx;
            let mut dy;
            let newton_ok = det.abs() > 0.0 && (!want_min || (det > 0.0 && s.hxx > 0.0));
            if newton_ok {
                dx = -(s.hyy * s.gx - s.hxy * s.gy) / det;
                dy = -(-s.hxy * s.gx + s.hxx * s.gy) / det;
            } else {
                let n = s.grad_norm();
                if n == 0.0 {
                    return Some((x, s));
                }
                dx = -s.gx / n * 0.25 * h;
                dy = -s.gy / n * 0.25 * h;
            }
            let len = dx.hypot(dy);
            if len > max_step {
                dx *= max_step / len;
                dy *= max_step / len;
            }
            x = Point::new(x.x + dx, x.y + dy);
            if len < 1e-9 * h {
                let s = self.sample(x)?;
                return Some((x, s));
            }
        }
        None
    }

    /// Minimax flood from the node nearest `start`: the lowest level at
    /// which the basin connects to a sink, and the node where that level is
    /// reached.
    pub fn flood(&self, start: Point) -> Option<(f64, usize)> {
        let g = self.grid;
        let s = g.stride();
        let (i0, j0) = g.nearest(start);
        let p0 = g.idx(i0, j0);
        if self.sink(p0) {
            return None;
        }
        let n = g.len();
        let mut level = vec![f64::INFINITY; n];
        let mut peak = vec![usize::MAX; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        level[p0] = self.values[p0];
        peak[p0] = p0;
        heap.push(Entry(level[p0], p0));
        while let Some(Entry(lv, p)) = heap.pop() {
            if done[p] {
                continue;
            }
            done[p] = true;
            if self.sink(p) {
                return Some((lv, peak[p]));
            }
            let (i, j) = g.ij(p);
            let nbrs = [
                (i + 1 <= g.nx).then(|| p + 1),
                (i >= 1).then(|| p - 1),
                (j + 1 <= g.ny).then(|| p + s),
                (j >= 1).then(|| p - s),
            ];
            for q in nbrs.into_iter().flatten() {
                if done[q] {
                    continue;
                }
                let (nl, pk) = if self.sink(q) || self.values[q] <= lv {
                    (lv, peak[p])
                } else {
                    (self.values[q], q)
                };
                if nl < level[q] {
                    level[q] = nl;
                    peak[q] = pk;
                    heap.push(Entry(nl, q));
                }
            }
        }
        None
    }

    /// Escape level above the minimum at `r_min`, refined to the saddle of
    /// the interpolant when one sits at the flood's bottleneck.
    pub fn escape(&self, r_min: Point) -> Option<Escape> {
        let (level, node) = self.flood(r_min)?;
        let g = self.grid;
        let (i, j) = g.ij(node);
        let seed = g.node(i, j);
        if let Some((p, smp)) = self.newton(seed, false, g.h) {
            let det = smp.hxx * smp.hyy - smp.hxy * smp.hxy;
            if det < 0.0 && p.dist(seed) < 3.0 * g.h {
                return Some(Escape { level: smp.v, point: p, flagged: false });
            }
        }
        // No saddle: the basin spills straight into a sink.
        let near_sink = (i.saturating_sub(2)..=(i + 2).min(g.nx))
            .any(|ii| (j.saturating_sub(2)..=(j + 2).min(g.ny)).any(|jj| self.sink(g.idx(ii, jj))));
        Some(Escape { level, point: seed, flagged: near_sink })
    }

    /// Stationary points of the interpolant found by Newton from every
    /// `stride`-th node inside `region`, merged within `merge` metres.
    pub fn stationary_points(&self, region: impl Fn(Point) -> bool, stride: usize, merge: f64) -> Vec<StationaryPoint> {
        let g = self.grid;
        let mut out: Vec<StationaryPoint> = Vec::new();
        for j in (1..g.ny).step_by(stride) {
            for i in (1..g.nx).step_by(stride) {
                let seed = g.node(i, j);
                if !region(seed) || self.sample(seed).is_none() {
                    continue;
                }
                let Some((p, s)) = self.newton(seed, false, g.h) else {
                    continue;
                };
                if !region(p) || !converged(&s, g.h) {
                    continue;
                }
                if out.iter().any(|o| o.position.dist(p) < merge) {
                    continue;
                }
                let det = s.hxx * s.hyy - s.hxy * s.hxy;
                let kind = if det < 0.0 {
                    StationaryKind::Saddle
                } else if s.hxx > 0.0 {
                    StationaryKind::Minimum
                } else {
                    StationaryKind::Maximum
                };
                out.push(StationaryPoint { position: p, value: s.v, kind });
            }
        }
        out
    }
}

// Gradient small against the curvature scale: the Newton step would be
// under a millionth of a cell.
fn converged(s: &Sample, h: f64) -> bool {
    let curv = s.hxx.abs() + s.hyy.abs() + s.hxy.abs();
    curv > 0.0 && s.grad_norm() / curv < 1e-6 * h
}
