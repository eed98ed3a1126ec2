//! Closed-form line-charge model of trap cross-sections.
//!
//! A line charge of strength `λ` at `z0` has complex potential
//! `w = −λ·ln(z − z0)` (units with `λ/2πε0 = 1`). With `f = dw/dz = −Ex + iEy`,
//! `Υ = |f|²` plays the role of the pseudopotential. Since `f` is analytic,
//! every derivative of `Υ` follows from `f`, `f'` and `f''`.
//!
//! `Υ` is subharmonic, so it has no strict local maxima in the plane. The
//! points called maxima here are its saddles: maxima along the escape path
//! from a minimum.

use crate::contour::{marching_squares, ray_hit, Segment};
use crate::geometry::{CrossSectionGeometry, Electrode, ElectrodeShape, GeometryError, Point, Role};
use crate::laplace::Grid;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("line charge needs a finite position and nonzero strength")]
    BadCharge,
    #[error("a line-charge system needs at least two charges")]
    TooFewCharges,
    #[error("evaluation point coincides with the charge at {0}")]
    AtCharge(Complex64),
    #[error("wire diameter {diameter} must be positive and below half the charge separation {separation}")]
    BadDiameter { diameter: f64, separation: f64 },
    #[error("equipotential around the charge at {0} is not closed inside its window")]
    ContourFailed(Complex64),
    #[error("no charge ratio in [{lo}, {hi}] equalizes the wire diameters")]
    NoRatio { lo: f64, hi: f64 },
    #[error("no minimum of Υ found")]
    NoMinimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineCharge {
    pub z: Complex64,
    pub strength: f64,
}

impl LineCharge {
    pub fn new(x: f64, y: f64, strength: f64) -> Result<Self, AnalyticError> {
        if !x.is_finite() || !y.is_finite() || !strength.is_finite() || strength == 0.0 {
            return Err(AnalyticError::BadCharge);
        }
        Ok(LineCharge { z: Complex64::new(x, y), strength })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineChargeSystem {
    pub label: String,
    pub charges: Vec<LineCharge>,
}

/// `Υ` with its gradient and Hessian `[xx, xy, yy]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpsilonDerivatives {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpsilonPointKind {
    Minimum,
    /// Saddle of `Υ`; a maximum along the escape path.
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpsilonPoint {
    pub z: Complex64,
    pub value: f64,
    pub kind: UpsilonPointKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticTrapResult {
    pub label: String,
    pub minima: Vec<Complex64>,
    pub maxima: Vec<Complex64>,
    /// Second derivative of `Υ` at the trap minimum along any direction
    /// (the Hessian there is isotropic).
    pub curvature_at_min: f64,
    /// Lowest `Υ` over the maxima: the escape barrier.
    pub upsilon_at_max: f64,
    /// `sqrt(curvature / 32)`.
    pub frequency_ratio_vs_quadrupole: f64,
    /// `upsilon_at_max / 3√3`.
    pub depth_ratio_vs_quadrupole: f64,
}

/// Curvature of `Υ_q` at its minimum.
pub const QUADRUPOLE_CURVATURE: f64 = 32.0;

/// `Υ_q` at its four maxima, `3√3`.
pub fn quadrupole_barrier() -> f64 {
    3.0 * 3f64.sqrt()
}

impl LineChargeSystem {
    pub fn new(label: &str, charges: Vec<LineCharge>) -> Result<Self, AnalyticError> {
        if charges.len() < 2 {
            return Err(AnalyticError::TooFewCharges);
        }
        Ok(LineChargeSystem { label: label.into(), charges })
    }

    /// `+1` at `±1`, `−1` at `±i`.
    pub fn quadrupole() -> Self {
        let c = |x, y, s| LineCharge { z: Complex64::new(x, y), strength: s };
        LineChargeSystem {
            label: "quadrupole".into(),
            charges: vec![c(1.0, 0.0, 1.0), c(-1.0, 0.0, 1.0), c(0.0, 1.0, -1.0), c(0.0, -1.0, -1.0)],
        }
    }

    /// `+inner` at `−1/2`, `−inner` at `1/2`, `+1` at `3/2`, `−1` at `−3/2`.
    pub fn four_wire_surface(inner: f64) -> Self {
        let c = |x, s| LineCharge { z: Complex64::new(x, 0.0), strength: s };
        LineChargeSystem {
            label: "four-wire surface".into(),
            charges: vec![c(-0.5, inner), c(0.5, -inner), c(1.5, 1.0), c(-1.5, -1.0)],
        }
    }

    fn check(&self, z: Complex64) -> Result<(), AnalyticError> {
        match self.charges.iter().find(|c| (z - c.z).norm() < 1e-14) {
            Some(c) => Err(AnalyticError::AtCharge(c.z)),
            None => Ok(()),
        }
    }

    // f, f', f''
    fn derivs(&self, z: Complex64) -> [Complex64; 3] {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for c in &self.charges {
            let r = (z - c.z).inv();
            out[0] -= c.strength * r;
            out[1] += c.strength * r * r;
            out[2] -= 2.0 * c.strength * r * r * r;
        }
        out
    }

    /// Real potential `Re w`.
    pub fn potential(&self, z: Complex64) -> Result<f64, AnalyticError> {
        self.check(z)?;
        Ok(self.charges.iter().map(|c| -c.strength * (z - c.z).norm().ln()).sum())
    }

    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (k, a) in self.charges.iter().enumerate() {
            for b in &self.charges[k + 1..] {
                best = best.min((a.z - b.z).norm());
            }
        }
        best
    }
}

/// Complex potential `w` and the field `Ex + iEy`.
pub fn complex_potential_and_field(sys: &LineChargeSystem, z: Complex64) -> Result<(Complex64, Complex64), AnalyticError> {
    sys.check(z)?;
    let w = sys.charges.iter().map(|c| -c.strength * (z - c.z).ln()).sum();
    let f = sys.derivs(z)[0];
    Ok((w, Complex64::new(-f.re, f.im)))
}

pub fn upsilon(sys: &LineChargeSystem, z: Complex64) -> Result<f64, AnalyticError> {
    sys.check(z)?;
    Ok(sys.derivs(z)[0].norm_sqr())
}

pub fn upsilon_derivatives(sys: &LineChargeSystem, z: Complex64) -> Result<UpsilonDerivatives, AnalyticError> {
    sys.check(z)?;
    let [f, f1, f2] = sys.derivs(z);
    let a = f.conj() * f1;
    let b = f.conj() * f2;
    let m = 2.0 * f1.norm_sqr();
    Ok(UpsilonDerivatives {
        value: f.norm_sqr(),
        grad: [2.0 * a.re, -2.0 * a.im],
        hess: [m + 2.0 * b.re, -2.0 * b.im, m - 2.0 * b.re],
    })
}

/// Newton on `∇Υ` from a lattice of seeds covering `[−half, half]²` with
/// `n×n` points; points closer than `merge` are merged.
pub fn stationary_points(sys: &LineChargeSystem, half: f64, n: usize, merge: f64) -> Vec<UpsilonPoint> {
    let sep = sys.min_separation();
    let mut out: Vec<UpsilonPoint> = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let seed = Complex64::new(
                -half + 2.0 * half * a as f64 / (n - 1) as f64,
                -half + 2.0 * half * b as f64 / (n - 1) as f64,
            );
            if sys.charges.iter().any(|c| (seed - c.z).norm() < 0.05 * sep) {
                continue;
            }
            let Some(z) = newton(sys, seed, 0.1 * sep) else { continue };
            if z.re.abs() > half || z.im.abs() > half || out.iter().any(|p| (p.z - z).norm() < merge) {
                continue;
            }
            let d = upsilon_derivatives(sys, z).unwrap();
            let det = d.hess[0] * d.hess[2] - d.hess[1] * d.hess[1];
            let kind = if det > 0.0 && d.hess[0] > 0.0 {
                UpsilonPointKind::Minimum
            } else {
                UpsilonPointKind::Maximum
            };
            out.push(UpsilonPoint { z, value: d.value, kind });
        }
    }
    out.sort_by(|p, q| p.z.im.total_cmp(&q.z.im).then(p.z.re.total_cmp(&q.z.re)));
    out
}

fn newton(sys: &LineChargeSystem, mut z: Complex64, max_step: f64) -> Option<Complex64> {
    for _ in 0..100 {
        let d = upsilon_derivatives(sys, z).ok()?;
        let [a, b, c] = d.hess;
        let det = a * c - b * b;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let mut step = Complex64::new(-(c * d.grad[0] - b * d.grad[1]) / det, -(-b * d.grad[0] + a * d.grad[1]) / det);
        if step.norm() > max_step {
            step *= max_step / step.norm();
        }
        z += step;
        if step.norm() < 1e-14 * (1.0 + z.norm()) {
            let g = upsilon_derivatives(sys, z).ok()?;
            let scale = 1.0 + g.hess.iter().map(|h| h.abs()).sum::<f64>();
            return (g.grad[0].hypot(g.grad[1]) < 1e-9 * scale).then_some(z);
        }
    }
    None
}

/// Grid-solver realization of `sys`: a disc of radius `radius` at each
/// charge, lengths multiplied by `unit` (metres per oracle unit). Positive
/// charges become RF electrodes, negative ones control electrodes, so the
/// discs are meant to be driven by charge. `d` is the distance from `axis`
/// to the nearest disc surface.
pub fn thin_wire_geometry(
    sys: &LineChargeSystem,
    radius: f64,
    unit: f64,
    axis: Complex64,
) -> Result<CrossSectionGeometry, GeometryError> {
    let mut control = 0;
    let electrodes = sys
        .charges
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let role = if c.strength > 0.0 {
                Role::Rf
            } else {
                control += 1;
                Role::Control(control - 1)
            };
            let shape = ElectrodeShape::Disc { center: Point::new(c.z.re * unit, c.z.im * unit), radius: radius * unit };
            Electrode::new(format!("wire-{k}"), shape, role)
        })
        .collect();
    let near = sys.charges.iter().map(|c| (c.z - axis).norm()).fold(f64::INFINITY, f64::min);
    Ok(CrossSectionGeometry::new(format!("{} wires", sys.label), (near - radius) * unit, electrodes)?
        .with_hint(Point::new(axis.re * unit, axis.im * unit)))
}

/// Search for the trap: stationary points over `[−3, 3]²`, the minimum
/// nearest the origin with `y ≥ 0`, and the lowest maximum as the barrier.
pub fn analyze_system(sys: &LineChargeSystem) -> Result<AnalyticTrapResult, AnalyticError> {
    let pts = stationary_points(sys, 3.0, 61, 1e-6);
    let minima: Vec<Complex64> =
        pts.iter().filter(|p| p.kind == UpsilonPointKind::Minimum).map(|p| p.z).collect();
    let maxima: Vec<&UpsilonPoint> = pts.iter().filter(|p| p.kind == UpsilonPointKind::Maximum).collect();
    let trap = minima
        .iter()
        .filter(|z| z.im >= -1e-12)
        .min_by(|a, b| a.norm().total_cmp(&b.norm()))
        .ok_or(AnalyticError::NoMinimum)?;
    let d = upsilon_derivatives(sys, *trap)?;
    let curvature = 0.5 * (d.hess[0] + d.hess[2]);
    let barrier = maxima.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    Ok(AnalyticTrapResult {
        label: sys.label.clone(),
        minima,
        maxima: maxima.iter().map(|p| p.z).collect(),
        curvature_at_min: curvature,
        upsilon_at_max: barrier,
        frequency_ratio_vs_quadrupole: (curvature / QUADRUPOLE_CURVATURE).sqrt(),
        depth_ratio_vs_quadrupole: barrier / quadrupole_barrier(),
    })
}

/// Closed-form quadrupole values.
pub fn reference_quadrupole() -> AnalyticTrapResult {
    let a = 1.0 / (2.0 * 3f64.sqrt()).sqrt();
    AnalyticTrapResult {
        label: "quadrupole".into(),
        minima: vec![Complex64::new(0.0, 0.0)],
        maxima: vec![Complex64::new(-a, -a), Complex64::new(a, -a), Complex64::new(-a, a), Complex64::new(a, a)],
        curvature_at_min: QUADRUPOLE_CURVATURE,
        upsilon_at_max: quadrupole_barrier(),
        frequency_ratio_vs_quadrupole: 1.0,
        depth_ratio_vs_quadrupole: 1.0,
    }
}

/// Closed-form values for four equal wires in a plane.
pub fn reference_four_wire_surface() -> AnalyticTrapResult {
    let s3 = 3f64.sqrt();
    let ym = (3.0 + 4.0 * s3).sqrt() / 2.0;
    AnalyticTrapResult {
        label: "four-wire surface".into(),
        minima: vec![Complex64::new(0.0, -s3 / 2.0), Complex64::new(0.0, s3 / 2.0)],
        maxima: vec![Complex64::new(0.0, -ym), Complex64::new(0.0, ym)],
        curvature_at_min: 8.0 / 3.0,
        upsilon_at_max: 1.0 / (7.0 + 4.0 * s3),
        frequency_ratio_vs_quadrupole: 1.0 / (2.0 * s3),
        depth_ratio_vs_quadrupole: 1.0 / (3.0 * (12.0 + 7.0 * s3)),
    }
}

/// Equipotential of the wire around one charge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireContour {
    pub centre: Complex64,
    pub level: f64,
    /// Mean of 16 radial samples, doubled.
    pub mean_diameter: f64,
    /// `max/min` radius about the charge, minus one.
    pub circularity: f64,
    /// `|vertical/horizontal diameter − 1|`.
    pub axis_mismatch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteConductorFit {
    /// Inner-wire charge over outer-wire charge.
    pub charge_ratio: f64,
    pub wire_diameter: f64,
    pub wires: Vec<WireContour>,
    pub result: AnalyticTrapResult,
    /// The diameter-matching criterion is a reconstruction; always true.
    pub reconstructed_criterion: bool,
}

const WINDOW_NODES: usize = 199;

// Potential sampled on a square window around `c`. An odd cell count keeps
// the charge off the nodes.
fn window(sys: &LineChargeSystem, c: Complex64, half: f64) -> (Grid, Vec<f64>) {
    let h = 2.0 * half / WINDOW_NODES as f64;
    let grid = Grid::new(WINDOW_NODES, WINDOW_NODES, h, Point::new(c.re - half, c.im - half)).unwrap();
    let vals = (0..grid.len())
        .map(|p| {
            let (i, j) = grid.ij(p);
            sys.potential(Complex64::new(grid.x(i), grid.y(j))).unwrap_or(f64::NAN)
        })
        .collect();
    (grid, vals)
}

fn radii(segs: &[Segment], c: Complex64) -> Option<Vec<f64>> {
    let centre = Point::new(c.re, c.im);
    (0..16).map(|k| ray_hit(segs, centre, k as f64 * PI / 8.0)).collect()
}

fn contour_at(grid: &Grid, vals: &[f64], c: Complex64, level: f64) -> Option<WireContour> {
    let segs = marching_squares(grid, vals, level, |_| true);
    let r = radii(&segs, c)?;
    let mean = r.iter().sum::<f64>() / 16.0;
    let max = r.iter().copied().fold(0.0, f64::max);
    let min = r.iter().copied().fold(f64::INFINITY, f64::min);
    let horiz = r[0] + r[8];
    let vert = r[4] + r[12];
    Some(WireContour {
        centre: c,
        level,
        mean_diameter: 2.0 * mean,
        circularity: max / min - 1.0,
        axis_mismatch: (vert / horiz - 1.0).abs(),
    })
}

/// Level whose contour around charge `k` has mean diameter `diameter`.
fn wire_level(sys: &LineChargeSystem, k: usize, diameter: f64) -> Result<WireContour, AnalyticError> {
    let c = sys.charges[k].z;
    let half = (1.6 * diameter).min(0.5 * sys.min_separation());
    let (grid, vals) = window(sys, c, half);
    let fail = AnalyticError::ContourFailed(c);
    let at = |r: f64| sys.potential(c + Complex64::new(r, 0.0)).unwrap();
    let (mut near, mut far) = (at(0.25 * diameter), at(0.9 * half));
    let diam = |l: f64| contour_at(&grid, &vals, c, l).map(|w| w.mean_diameter);
    for _ in 0..100 {
        let mid = 0.5 * (near + far);
        // an open contour is too large
        if diam(mid).map_or(true, |d| d > diameter) {
            far = mid;
        } else {
            near = mid;
        }
        if (near - far).abs() < 1e-13 * (1.0 + mid.abs()) {
            break;
        }
    }
    contour_at(&grid, &vals, c, 0.5 * (near + far)).ok_or(fail)
}

/// Fits the inner/outer charge ratio of the four-wire surface system so that
/// equipotentials of mean diameter `diameter` around the outer wires and the
/// inner wires sit at the same level, then re-analyzes the adjusted system.
pub fn finite_conductor_fit(diameter: f64) -> Result<FiniteConductorFit, AnalyticError> {
    let probe = LineChargeSystem::four_wire_surface(1.0);
    let sep = probe.min_separation();
    if !(diameter > 0.0 && diameter < 0.5 * sep) {
        return Err(AnalyticError::BadDiameter { diameter, separation: sep });
    }
    // Indices: 0 inner (+), 2 outer (+).
    let mismatch = |r: f64| -> Result<f64, AnalyticError> {
        let sys = LineChargeSystem::four_wire_surface(r);
        let outer = wire_level(&sys, 2, diameter)?;
        let c = sys.charges[0].z;
        let half = (1.6 * diameter).min(0.5 * sep);
        let (grid, vals) = window(&sys, c, half);
        Ok(match contour_at(&grid, &vals, c, outer.level) {
            Some(w) => w.mean_diameter / diameter - 1.0,
            // not resolved in the window: only the sign matters
            None => {
                let rim = sys.potential(c + Complex64::new(0.5 * diameter, 0.0))?;
                if rim.abs() < outer.level.abs() {
                    -1.0
                } else {
                    1.0
                }
            }
        })
    };
    let (mut lo, mut hi) = (0.5, 4.0);
    let (flo, fhi) = (mismatch(lo)?, mismatch(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(AnalyticError::NoRatio { lo, hi });
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..60 {
        r = 0.5 * (lo + hi);
        let m = mismatch(r)?;
        if m.abs() < 1e-5 {
            break;
        }
        if m.signum() == flo.signum() {
            lo = r;
        } else {
            hi = r;
        }
    }
    let sys = LineChargeSystem::four_wire_surface(r);
    let outer = wire_level(&sys, 2, diameter)?;
    let wires = (0..4)
        .map(|k| {
            let c = sys.charges[k].z;
            let half = (1.6 * diameter).min(0.5 * sep);
            let (grid, vals) = window(&sys, c, half);
            let level = if sys.charges[k].strength > 0.0 { outer.level } else { -outer.level };
            contour_at(&grid, &vals, c, level).ok_or(AnalyticError::ContourFailed(c))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut result = analyze_system(&sys)?;
    result.label = format!("four-wire surface, wire diameter {diameter}");
    Ok(FiniteConductorFit { charge_ratio: r, wire_diameter: diameter, wires, result, reconstructed_criterion: true })
}

/// `x,y,Υ` samples on an `n×n` lattice over `[−half, half]²`; points on a
/// charge are skipped.
pub fn upsilon_csv(sys: &LineChargeSystem, half: f64, n: usize) -> String {
    let mut s = String::from("x,y,value\n");
    for b in 0..n {
        for a in 0..n {
            let z = Complex64::new(
                -half + 2.0 * half * a as f64 / (n - 1) as f64,
                -half + 2.0 * half * b as f64 / (n - 1) as f64,
            );
            if let Ok(u) = upsilon(sys, z) {
                s.push_str(&format!("{},{},{}\n", z.re, z.im, u));
            }
        }
    }
    s
}
