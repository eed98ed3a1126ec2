//! 2D Laplace solver for electrode cross-sections.
//!
//! Nodes inside an electrode are fixed at its voltage, the outer box is
//! grounded. Free nodes next to an electrode surface use Shortley-Weller
//! stencils with the exact distance to the surface, so electrodes need not
//! line up with the lattice. Relaxation is red-black SOR started from the
//! prolongated solution of successively coarser grids.

mod export;
mod grid;

pub use export::{potential_csv, write_field_csv, GridMetadata};
pub use grid::Grid;

use crate::geometry::{CrossSectionGeometry, Point};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LaplaceError {
    #[error("grid needs at least 16 cells per side (got {0}×{1})")]
    GridTooSmall(usize, usize),
    #[error("grid spacing must be positive (got {0})")]
    BadSpacing(f64),
    #[error("outer margin must be at least 8·d (got {0}·d)")]
    MarginTooSmall(f64),
    #[error("grid too coarse: electrode `{0}` is {1:.3e} m thick, less than two cells of {2:.3e} m")]
    TooCoarse(String, f64, f64),
    #[error("tolerance must lie in (0, 1e-3) (got {0})")]
    BadTolerance(f64),
    #[error("relative permittivity must be at least 1 (got {0})")]
    BadPermittivity(f64),
    #[error("relaxation did not converge after {sweeps} sweeps; residual {residual:.3e}")]
    NotConverged { sweeps: usize, residual: f64 },
    #[error("no voltage given for electrode `{0}`")]
    MissingVoltage(String),
    #[error("flux square around `{0}` touches an electrode or the grid edge")]
    FluxSquare(String),
    #[error("expected {expected} electrode voltages, got {got}")]
    VoltageCount { expected: usize, got: usize },
}

/// Relative permittivity of the space between electrodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DielectricMap {
    Uniform,
    /// ε below `y_top`, vacuum above.
    Substrate { y_top: f64, eps: f64 },
}

impl DielectricMap {
    pub fn check(&self) -> Result<(), LaplaceError> {
        match *self {
            DielectricMap::Substrate { eps, .. } if !(eps >= 1.0 && eps.is_finite()) => {
                Err(LaplaceError::BadPermittivity(eps))
            }
            _ => Ok(()),
        }
    }

    // Edge parallel to the interface at height y: area average over the
    // control strip [y - h/2, y + h/2].
    fn horizontal(&self, y: f64, h: f64) -> f64 {
        match *self {
            DielectricMap::Uniform => 1.0,
            DielectricMap::Substrate { y_top, eps } => {
                let below = ((y_top - (y - h / 2.0)) / h).clamp(0.0, 1.0);
                below * eps + (1.0 - below)
            }
        }
    }

    // Edge across the interface from ya to yb: series (harmonic) combination.
    fn vertical(&self, ya: f64, yb: f64) -> f64 {
        match *self {
            DielectricMap::Uniform => 1.0,
            DielectricMap::Substrate { y_top, eps } => {
                let (lo, hi) = if ya < yb { (ya, yb) } else { (yb, ya) };
                let len = hi - lo;
                let below = (y_top.min(hi) - lo).max(0.0);
                let above = len - below;
                len / (below / eps + above)
            }
        }
    }
}

const NONE: u32 = u32::MAX;
const REGULAR: u8 = 0;
const IRREGULAR: u8 = 1;
const FIXED: u8 = 2;
/// Owner tag of grounded box nodes.
pub const BOX: u32 = u32::MAX - 1;
const SNAP: f64 = 1e-6;
const SMOOTHING_SWEEPS: usize = 30;

/// One of the four stencil arms of a free node: the fraction of `h` to the
/// neighbour or to the electrode surface, and the electrode if cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arm {
    pub t: f64,
    pub electrode: u32,
}

impl Arm {
    pub fn is_cut(&self) -> bool {
        self.electrode != NONE
    }
}

/// Node classification and stencils for one grid; shared by every solve on it.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub grid: Grid,
    pub n_electrodes: usize,
    pub eps: DielectricMap,
    kind: Vec<u8>,
    owner: Vec<u32>,
    slot: Vec<u32>,
    weights: Vec<[f64; 4]>,
    // weights with cut arms zeroed, for the sweep
    nbw: Vec<[f64; 4]>,
    arms: Vec<[Arm; 4]>,
    names: Vec<String>,
}

// East, west, north, south.
const DIRS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

impl Discretization {
    pub fn build(g: &CrossSectionGeometry, grid: Grid, eps: DielectricMap) -> Result<Self, LaplaceError> {
        eps.check()?;
        let n = grid.len();
        let mut kind = vec![REGULAR; n];
        let mut owner = vec![NONE; n];
        let shapes: Vec<_> = g.electrodes.iter().map(|e| e.shape).collect();
        let boxes: Vec<_> = shapes.iter().map(|s| s.bounds()).collect();
        let h = grid.h;

        for j in 0..=grid.ny {
            for i in 0..=grid.nx {
                let p = grid.idx(i, j);
                if grid.on_boundary(i, j) {
                    kind[p] = FIXED;
                    owner[p] = BOX;
                    continue;
                }
                let pt = grid.node(i, j);
                for (e, s) in shapes.iter().enumerate() {
                    let b = boxes[e];
                    if pt.x >= b.x0 && pt.x <= b.x1 && pt.y >= b.y0 && pt.y <= b.y1 && s.contains(pt) {
                        kind[p] = FIXED;
                        owner[p] = e as u32;
                        break;
                    }
                }
            }
        }

        let mut slot = vec![NONE; n];
        let mut weights = Vec::new();
        let mut nbw = Vec::new();
        let mut arms_all = Vec::new();
        for j in 1..grid.ny {
            for i in 1..grid.nx {
                let p = grid.idx(i, j);
                if kind[p] == FIXED {
                    continue;
                }
                let pt = grid.node(i, j);
                let mut arms = [Arm { t: 1.0, electrode: NONE }; 4];
                for (e, s) in shapes.iter().enumerate() {
                    let b = boxes[e];
                    if pt.x < b.x0 - h || pt.x > b.x1 + h || pt.y < b.y0 - h || pt.y > b.y1 + h {
                        continue;
                    }
                    for (k, (dx, dy)) in DIRS.iter().enumerate() {
                        let q = Point::new(pt.x + *dx as f64 * h, pt.y + *dy as f64 * h);
                        if let Some(t) = s.segment_crossing(pt, q) {
                            if t < arms[k].t {
                                arms[k] = Arm { t, electrode: e as u32 };
                            }
                        }
                    }
                }
                for a in arms.iter_mut() {
                    if a.t >= 1.0 - 1e-9 {
                        *a = Arm { t: 1.0, electrode: NONE };
                    }
                }
                if let Some(a) = arms.iter().find(|a| a.is_cut() && a.t < SNAP) {
                    kind[p] = FIXED;
                    owner[p] = a.electrode;
                    continue;
                }
                let len: Vec<f64> = arms.iter().map(|a| a.t * h).collect();
                let e_arm = [
                    eps.horizontal(pt.y, h),
                    eps.horizontal(pt.y, h),
                    eps.vertical(pt.y, pt.y + len[2]),
                    eps.vertical(pt.y, pt.y - len[3]),
                ];
                let regular = arms.iter().all(|a| !a.is_cut()) && e_arm.iter().all(|&e| e == e_arm[0]);
                if regular {
                    continue;
                }
                let a = [
                    2.0 * e_arm[0] / (len[0] * (len[0] + len[1])),
                    2.0 * e_arm[1] / (len[1] * (len[0] + len[1])),
                    2.0 * e_arm[2] / (len[2] * (len[2] + len[3])),
                    2.0 * e_arm[3] / (len[3] * (len[2] + len[3])),
                ];
                let diag: f64 = a.iter().sum();
                kind[p] = IRREGULAR;
                slot[p] = weights.len() as u32;
                let w = [a[0] / diag, a[1] / diag, a[2] / diag, a[3] / diag];
                let mut z = w;
                for (zk, arm) in z.iter_mut().zip(&arms) {
                    if arm.is_cut() {
                        *zk = 0.0;
                    }
                }
                weights.push(w);
                nbw.push(z);
                arms_all.push(arms);
            }
        }
        Ok(Discretization {
            grid,
            n_electrodes: shapes.len(),
            eps,
            kind,
            owner,
            slot,
            weights,
            nbw,
            arms: arms_all,
            names: g.electrodes.iter().map(|e| e.name.clone()).collect(),
        })
    }

    /// Whether node `p` holds a prescribed value (electrode or box).
    pub fn is_fixed(&self, p: usize) -> bool {
        self.kind[p] == FIXED
    }

    /// Electrode index owning node `p`, [`BOX`] for the outer boundary, `None` if free.
    pub fn owner(&self, p: usize) -> Option<u32> {
        (self.owner[p] != NONE).then_some(self.owner[p])
    }

    /// Stencil arms of free node `p` (all uncut for regular nodes).
    pub fn arms(&self, p: usize) -> [Arm; 4] {
        match self.kind[p] {
            IRREGULAR => self.arms[self.slot[p] as usize],
            _ => [Arm { t: 1.0, electrode: NONE }; 4],
        }
    }

    pub fn electrode_names(&self) -> &[String] {
        &self.names
    }

    /// Fixed values for the given electrode voltages and the boundary-cut
    /// constants of irregular nodes.
    fn prepare(&self, phi: &mut [f64], volts: &[f64]) -> Vec<f64> {
        for (p, &o) in self.owner.iter().enumerate() {
            if self.kind[p] == FIXED {
                phi[p] = if o == BOX { 0.0 } else { volts[o as usize] };
            }
        }
        self.arms
            .iter()
            .zip(&self.weights)
            .map(|(arms, w)| {
                arms.iter()
                    .zip(w)
                    .filter(|(a, _)| a.is_cut())
                    .map(|(a, w)| w * volts[a.electrode as usize])
                    .sum()
            })
            .collect()
    }

    #[inline]
    fn gauss_seidel(&self, phi: &[f64], consts: &[f64], p: usize, s: usize) -> f64 {
        if self.kind[p] == REGULAR {
            0.25 * (phi[p + 1] + phi[p - 1] + phi[p + s] + phi[p - s])
        } else {
            let k = self.slot[p] as usize;
            let w = &self.nbw[k];
            w[0] * phi[p + 1] + w[1] * phi[p - 1] + w[2] * phi[p + s] + w[3] * phi[p - s] + consts[k]
        }
    }

    // One red-black sweep. Black nodes of row j-1 are relaxed right after the
    // red nodes of row j, which is the same update order as two full passes
    // but touches memory once. Returns the largest Gauss-Seidel correction.
    fn sweep(&self, phi: &mut [f64], consts: &[f64], w_red: f64, w_black: f64) -> f64 {
        let ny = self.grid.ny;
        assert_eq!(phi.len(), self.kind.len());
        assert_eq!(consts.len(), self.nbw.len());
        let mut worst: f64 = 0.0;
        for j in 1..=ny {
            if j < ny {
                worst = worst.max(self.relax_row(phi, consts, w_red, j, 0));
            }
            if j >= 2 {
                worst = worst.max(self.relax_row(phi, consts, w_black, j - 1, 1));
            }
        }
        worst
    }

    #[inline(always)]
    fn relax_row(&self, phi: &mut [f64], consts: &[f64], omega: f64, j: usize, color: usize) -> f64 {
        let nx = self.grid.nx;
        let s = self.grid.stride();
        let kind = &self.kind[..];
        let slot = &self.slot[..];
        let nbw = &self.nbw[..];
        let ph = phi.as_mut_ptr();
        let row = j * s;
        let mut worst: f64 = 0.0;
        // colour 0 holds the nodes with even i + j
        let mut i = if (j + color) % 2 == 0 { 2 } else { 1 };
        while i < nx {
            let p = row + i;
            // SAFETY: callers pass 1 <= j < ny and 1 <= i < nx, so p and its four
            // neighbours lie inside the (nx+1)·(ny+1) arrays whose lengths the
            // caller asserted; slots of irregular nodes index nbw/consts by
            // construction.
            unsafe {
                let k = *kind.get_unchecked(p);
                if k != FIXED {
                    let e = *ph.add(p + 1);
                    let w = *ph.add(p - 1);
                    let n = *ph.add(p + s);
                    let so = *ph.add(p - s);
                    let gs = if k == REGULAR {
                        0.25 * ((e + w) + (n + so))
                    } else {
                        let q = *slot.get_unchecked(p) as usize;
                        let c = nbw.get_unchecked(q);
                        c[0] * e + c[1] * w + c[2] * n + c[3] * so + *consts.get_unchecked(q)
                    };
                    let old = *ph.add(p);
                    let c = gs - old;
                    *ph.add(p) = old + omega * c;
                    let a = c.abs();
                    if a > worst {
                        worst = a;
                    }
                }
            }
            i += 2;
        }
        worst
    }

    /// Max and RMS of the normalized stencil residual over free nodes.
    fn residual(&self, phi: &[f64], consts: &[f64]) -> ResidualReport {
        let s = self.grid.stride();
        let mut max: f64 = 0.0;
        let mut sum = 0.0;
        let mut count = 0usize;
        let mut at = (0, 0);
        for j in 1..self.grid.ny {
            for i in 1..self.grid.nx {
                let p = j * s + i;
                if self.kind[p] == FIXED {
                    continue;
                }
                let r = (self.gauss_seidel(phi, consts, p, s) - phi[p]).abs();
                if r > max {
                    max = r;
                    at = (i, j);
                }
                sum += r * r;
                count += 1;
            }
        }
        ResidualReport { max, rms: (sum / count.max(1) as f64).sqrt(), worst_node: at }
    }

    fn rho_jacobi(&self) -> f64 {
        let pi = std::f64::consts::PI;
        ((pi / self.grid.nx as f64).cos() + (pi / self.grid.ny as f64).cos()) / 2.0
    }

    /// Asymptotic over-relaxation factor reached by the Chebyshev schedule.
    pub fn optimal_omega(&self) -> f64 {
        let rho = self.rho_jacobi();
        2.0 / (1.0 + (1.0 - rho * rho).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max: f64,
    pub rms: f64,
    pub worst_node: (usize, usize),
}

/// Numerical settings; recorded in every output's provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Grid spacing in units of d.
    pub h_over_d: f64,
    pub margin_d: f64,
    pub tol: f64,
    /// Over-relaxation factor; `None` derives it from the grid size.
    pub omega: Option<f64>,
    /// Start from coarse-grid solutions.
    pub cascade: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { h_over_d: 1.0 / 40.0, margin_d: 8.0, tol: 1e-6, omega: None, cascade: true }
    }
}

/// Number of times the grid can be halved for the cascade.
fn cascade_levels(g: &CrossSectionGeometry, settings: &SolverSettings) -> u32 {
    if !settings.cascade {
        return 0;
    }
    let b = g.bounds();
    let span = ((b.x1 - b.x0).min(b.y1 - b.y0) + 2.0 * settings.margin_d * g.d) / (settings.h_over_d * g.d);
    let mut l = 0;
    while l < 6 && span / f64::from(1u32 << (l + 1)) >= 32.0 {
        l += 1;
    }
    l
}

/// Grid for `g` under `settings`, sized so that the cascade can coarsen it.
pub fn make_grid(g: &CrossSectionGeometry, settings: &SolverSettings) -> Result<Grid, LaplaceError> {
    Grid::for_geometry(g, settings.h_over_d * g.d, settings.margin_d, cascade_levels(g, settings))
}

/// Discretizations from the fine grid down to the coarsest cascade level.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub levels: Vec<Arc<Discretization>>,
    pub omega: Option<f64>,
    pub cascade: bool,
}

impl Hierarchy {
    pub fn build(
        g: &CrossSectionGeometry,
        grid: Grid,
        eps: DielectricMap,
        cascade: bool,
    ) -> Result<Self, LaplaceError> {
        for e in &g.electrodes {
            let m = e.shape.min_dimension();
            if m < 2.0 * grid.h * (1.0 - 1e-9) {
                return Err(LaplaceError::TooCoarse(e.name.clone(), m, grid.h));
            }
        }
        let mut levels = vec![Arc::new(Discretization::build(g, grid, eps)?)];
        if cascade {
            let mut cur = grid;
            while let Some(c) = cur.coarsen() {
                levels.push(Arc::new(Discretization::build(g, c, eps)?));
                cur = c;
            }
        }
        Ok(Hierarchy { levels, omega: None, cascade })
    }

    pub fn fine(&self) -> &Arc<Discretization> {
        &self.levels[0]
    }

    /// Solves with the given per-electrode voltages.
    pub fn solve(&self, volts: &[f64], tol: f64, mut trace: Option<&mut Vec<f64>>) -> Result<Solved, LaplaceError> {
        if !(tol > 0.0 && tol < 1e-3) {
            return Err(LaplaceError::BadTolerance(tol));
        }
        let n_e = self.fine().n_electrodes;
        if volts.len() != n_e {
            return Err(LaplaceError::VoltageCount { expected: n_e, got: volts.len() });
        }
        let scale = volts.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let mut phi: Option<Vec<f64>> = None;
        let mut total = 0;
        let mut last = ResidualReport { max: 0.0, rms: 0.0, worst_node: (0, 0) };
        for (lvl, disc) in self.levels.iter().enumerate().rev() {
            let grid = disc.grid;
            let mut cur = match phi.take() {
                Some(coarse) => prolong(&coarse, &self.levels[lvl + 1].grid, &grid),
                None => vec![0.0; grid.len()],
            };
            let consts = disc.prepare(&mut cur, volts);
            let rho2 = disc.rho_jacobi().powi(2);
            let mut omega = 1.0;
            let cap = 50 * grid.nx.max(grid.ny).pow(2);
            let target = tol * scale;
            let mut sweeps = 0;
            let smooth = if lvl + 1 < self.levels.len() { SMOOTHING_SWEEPS } else { 0 };
            loop {
                // Gauss-Seidel first to clear prolongation errors next to
                // electrodes, then a Chebyshev ordering of the factor that
                // settles at disc.omega().
                let c = if sweeps < smooth {
                    disc.sweep(&mut cur, &consts, 1.0, 1.0)
                } else if let Some(w) = self.omega {
                    disc.sweep(&mut cur, &consts, w, w)
                } else {
                    let w_red = omega;
                    let w_black = if sweeps == smooth {
                        1.0 / (1.0 - rho2 / 2.0)
                    } else {
                        1.0 / (1.0 - rho2 * w_red / 4.0)
                    };
                    omega = 1.0 / (1.0 - rho2 * w_black / 4.0);
                    disc.sweep(&mut cur, &consts, w_red, w_black)
                };
                sweeps += 1;
                if lvl == 0 {
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(c / scale);
                    }
                }
                if c <= target {
                    last = disc.residual(&cur, &consts);
                    if last.max <= target {
                        break;
                    }
                }
                if sweeps >= cap {
                    last = disc.residual(&cur, &consts);
                    return Err(LaplaceError::NotConverged { sweeps: total + sweeps, residual: last.max / scale });
                }
            }
            total += sweeps;
            phi = Some(cur);
        }
        let r = ResidualReport { max: last.max / scale, rms: last.rms / scale, worst_node: last.worst_node };
        Ok(Solved { values: phi.unwrap(), sweeps: total, residual: r })
    }
}

/// Raw result of one relaxation.
#[derive(Debug, Clone)]
pub struct Solved {
    pub values: Vec<f64>,
    pub sweeps: usize,
    pub residual: ResidualReport,
}

// Bilinear interpolation from a grid with twice the spacing.
fn prolong(coarse: &[f64], cg: &Grid, fg: &Grid) -> Vec<f64> {
    let mut out = vec![0.0; fg.len()];
    let cs = cg.stride();
    for j in 0..=fg.ny {
        let (jc, fy) = (j / 2, j % 2);
        for i in 0..=fg.nx {
            let (ic, fx) = (i / 2, i % 2);
            let c = |a: usize, b: usize| coarse[(jc + b) * cs + ic + a];
            out[fg.idx(i, j)] = match (fx, fy) {
                (0, 0) => c(0, 0),
                (1, 0) => 0.5 * (c(0, 0) + c(1, 0)),
                (0, 1) => 0.5 * (c(0, 0) + c(0, 1)),
                _ => 0.25 * (c(0, 0) + c(1, 0) + c(0, 1) + c(1, 1)),
            };
        }
    }
    out
}

/// A solved or superposed potential with the stencil data needed for fields.
#[derive(Debug, Clone)]
pub struct Potential {
    pub grid: Grid,
    pub values: Vec<f64>,
    /// Voltage of each electrode in this configuration.
    pub electrode_values: Vec<f64>,
    pub disc: Arc<Discretization>,
}

impl Potential {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    /// Same stencils, different nodal values; used for synthetic fields.
    pub fn with_values(&self, values: Vec<f64>, electrode_values: Vec<f64>) -> Potential {
        Potential { grid: self.grid, values, electrode_values, disc: self.disc.clone() }
    }

    pub fn residual(&self) -> ResidualReport {
        let mut phi = self.values.clone();
        let consts = self.disc.prepare(&mut phi, &self.electrode_values);
        self.disc.residual(&self.values, &consts)
    }
}

/// Per-electrode unit-voltage solutions on a shared grid.
#[derive(Debug, Clone)]
pub struct PotentialBasis {
    pub grid: Grid,
    pub disc: Arc<Discretization>,
    pub names: Vec<String>,
    pub potentials: Vec<Vec<f64>>,
    pub residuals: Vec<ResidualReport>,
    pub sweeps: Vec<usize>,
    pub tol: f64,
}

impl PotentialBasis {
    /// `Σ volts[e]·basis[e]`.
    pub fn superpose(&self, volts: &[f64]) -> Result<Potential, LaplaceError> {
        if volts.len() != self.potentials.len() {
            return Err(LaplaceError::VoltageCount { expected: self.potentials.len(), got: volts.len() });
        }
        let mut values = vec![0.0; self.grid.len()];
        for (b, &v) in self.potentials.iter().zip(volts) {
            if v != 0.0 {
                values.iter_mut().zip(b).for_each(|(o, x)| *o += v * x);
            }
        }
        Ok(Potential { grid: self.grid, values, electrode_values: volts.to_vec(), disc: self.disc.clone() })
    }

    /// Like [`superpose`](Self::superpose) with voltages keyed by electrode name.
    pub fn superpose_named(&self, volts: &HashMap<String, f64>) -> Result<Potential, LaplaceError> {
        let v = self
            .names
            .iter()
            .map(|n| volts.get(n).copied().ok_or_else(|| LaplaceError::MissingVoltage(n.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        self.superpose(&v)
    }
}

/// Solves every electrode at 1 V with the others grounded.
pub fn solve_basis(
    g: &CrossSectionGeometry,
    grid: Grid,
    eps: DielectricMap,
    tol: f64,
) -> Result<PotentialBasis, LaplaceError> {
    let hier = Hierarchy::build(g, grid, eps, true)?;
    solve_basis_with(&hier, tol)
}

pub fn solve_basis_with(hier: &Hierarchy, tol: f64) -> Result<PotentialBasis, LaplaceError> {
    let disc = hier.fine().clone();
    let n = disc.n_electrodes;
    let mut potentials = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    let mut sweeps = Vec::with_capacity(n);
    for e in 0..n {
        let mut v = vec![0.0; n];
        v[e] = 1.0;
        let s = hier.solve(&v, tol, None)?;
        potentials.push(s.values);
        residuals.push(s.residual);
        sweeps.push(s.sweeps);
    }
    Ok(PotentialBasis {
        grid: disc.grid,
        names: disc.names.clone(),
        disc,
        potentials,
        residuals,
        sweeps,
        tol,
    })
}

/// Solves a single voltage configuration directly.
pub fn solve_configuration(hier: &Hierarchy, volts: &[f64], tol: f64) -> Result<(Potential, Solved), LaplaceError> {
    let s = hier.solve(volts, tol, None)?;
    let disc = hier.fine().clone();
    let p = Potential { grid: disc.grid, values: s.values.clone(), electrode_values: volts.to_vec(), disc };
    Ok((p, s))
}

/// Residual of each basis function.
pub fn residual_check(basis: &PotentialBasis) -> Vec<ResidualReport> {
    (0..basis.potentials.len())
        .map(|e| {
            let mut v = vec![0.0; basis.potentials.len()];
            v[e] = 1.0;
            let mut phi = basis.potentials[e].clone();
            let consts = basis.disc.prepare(&mut phi, &v);
            basis.disc.residual(&basis.potentials[e], &consts)
        })
        .collect()
}

/// Outward flux of `E = -∇φ` through the node-aligned square of half-width
/// `half` around `c` (trapezoid rule, central differences across the edges).
/// Equals the enclosed charge over ε0 when the square crosses only vacuum.
/// `None` if the square or its one-node collar touches an electrode or the
/// grid edge.
pub fn flux_through_square(pot: &Potential, c: Point, half: f64) -> Option<f64> {
    let grid = pot.grid;
    let (ic, jc) = grid.nearest(c);
    let k = (half / grid.h).round().max(1.0) as usize;
    if ic < k + 1 || jc < k + 1 || ic + k + 1 > grid.nx || jc + k + 1 > grid.ny {
        return None;
    }
    let (i0, i1, j0, j1) = (ic - k, ic + k, jc - k, jc + k);
    let phi = |i: usize, j: usize| {
        let p = grid.idx(i, j);
        (!pot.disc.is_fixed(p)).then(|| pot.values[p])
    };
    // E_n·h per node: the h of the edge length cancels the 1/(2h) of the difference
    let mut total = 0.0;
    for m in 0..=2 * k {
        let w = if m == 0 || m == 2 * k { 0.5 } else { 1.0 };
        let (i, j) = (i0 + m, j0 + m);
        // right, left, top, bottom edges; outward normal derivative of -φ
        total += w * (phi(i1 - 1, j)? - phi(i1 + 1, j)?) / 2.0;
        total += w * (phi(i0 + 1, j)? - phi(i0 - 1, j)?) / 2.0;
        total += w * (phi(i, j1 - 1)? - phi(i, j1 + 1)?) / 2.0;
        total += w * (phi(i, j0 + 1)? - phi(i, j0 - 1)?) / 2.0;
    }
    Some(total)
}

/// Superposition of `basis` whose flux through the square `squares[k]`
/// (centre, half-width) equals `fluxes[k]`, one square per electrode: the
/// electrodes are driven by charge instead of voltage.
pub fn charge_driven(basis: &PotentialBasis, squares: &[(Point, f64)], fluxes: &[f64]) -> Result<Potential, LaplaceError> {
    let n = basis.potentials.len();
    if squares.len() != n || fluxes.len() != n {
        return Err(LaplaceError::VoltageCount { expected: n, got: squares.len().min(fluxes.len()) });
    }
    let unit: Vec<Potential> = (0..n)
        .map(|e| {
            let mut v = vec![0.0; n];
            v[e] = 1.0;
            basis.superpose(&v)
        })
        .collect::<Result<_, _>>()?;
    // a[k][j] = flux around k with electrode j at 1 V
    let mut a = vec![vec![0.0; n + 1]; n];
    for (k, &(c, half)) in squares.iter().enumerate() {
        for (j, u) in unit.iter().enumerate() {
            a[k][j] = flux_through_square(u, c, half).ok_or_else(|| LaplaceError::FluxSquare(basis.names[k].clone()))?;
        }
        a[k][n] = fluxes[k];
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let volts: Vec<f64> = (0..n).map(|k| a[k][n] / a[k][k]).collect();
    basis.superpose(&volts)
}

/// Electric field on grid nodes. Fixed nodes carry zero and are flagged.
#[derive(Debug, Clone)]
pub struct FieldMap {
    pub grid: Grid,
    pub ex: Vec<f64>,
    pub ey: Vec<f64>,
    pub disc: Arc<Discretization>,
}

impl FieldMap {
    pub fn magnitude_sq(&self, p: usize) -> f64 {
        self.ex[p] * self.ex[p] + self.ey[p] * self.ey[p]
    }

    pub fn scaled(&self, k: f64) -> FieldMap {
        FieldMap {
            grid: self.grid,
            ex: self.ex.iter().map(|v| v * k).collect(),
            ey: self.ey.iter().map(|v| v * k).collect(),
            disc: self.disc.clone(),
        }
    }
}

// Derivative at 0 from samples at -hm and +hp.
fn nonuniform_derivative(fm: f64, f0: f64, fp: f64, hm: f64, hp: f64) -> f64 {
    (hm * hm * (fp - f0) + hp * hp * (f0 - fm)) / (hm * hp * (hm + hp))
}

/// `E = -∇φ` by central differences; next to electrode surfaces the
/// three-point formula uses the surface value at its true distance.
pub fn field_of(pot: &Potential) -> FieldMap {
    let grid = pot.grid;
    let s = grid.stride();
    let h = grid.h;
    let phi = &pot.values;
    let mut ex = vec![0.0; grid.len()];
    let mut ey = vec![0.0; grid.len()];
    for j in 1..grid.ny {
        for i in 1..grid.nx {
            let p = j * s + i;
            if pot.disc.is_fixed(p) {
                continue;
            }
            let arms = pot.disc.arms(p);
            let val = |a: &Arm, q: usize| {
                if a.is_cut() {
                    pot.electrode_values[a.electrode as usize]
                } else {
                    phi[q]
                }
            };
            let (fe, fw, fn_, fs) = (val(&arms[0], p + 1), val(&arms[1], p - 1), val(&arms[2], p + s), val(&arms[3], p - s));
            ex[p] = -nonuniform_derivative(fw, phi[p], fe, arms[1].t * h, arms[0].t * h);
            ey[p] = -nonuniform_derivative(fs, phi[p], fn_, arms[3].t * h, arms[2].t * h);
        }
    }
    FieldMap { grid, ex, ey, disc: pot.disc.clone() }
}

/// Largest |E| over free nodes within one cell of any electrode surface.
pub fn max_surface_field(field: &FieldMap) -> f64 {
    let grid = field.grid;
    let s = grid.stride();
    let mut best: f64 = 0.0;
    for j in 1..grid.ny {
        for i in 1..grid.nx {
            let p = j * s + i;
            if field.disc.is_fixed(p) {
                continue;
            }
            let near = field.disc.arms(p).iter().any(|a| a.is_cut())
                || [p + 1, p - 1, p + s, p - s]
                    .iter()
                    .any(|&q| matches!(field.disc.owner(q), Some(o) if o != BOX));
            if near {
                best = best.max(field.magnitude_sq(p).sqrt());
            }
        }
    }
    best
}
