//! Electrode cross-sections in the plane transverse to the trap axis.
//!
//! Coordinates are metres. `x` runs parallel to the substrate (or to the
//! electrode layers), `y` is the height above it.

mod canonical;
mod spec_file;

pub use canonical::{build_canonical, CanonicalKind, CanonicalParams};
pub use spec_file::{parse_spec_file, serialize_spec_file, SpecError};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use thiserror::Error;

/// Half-slabs stand in for semi-infinite electrodes and must reach at least
/// this many multiples of `d`.
pub const MIN_SLAB_EXTENT_D: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, o: Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlabDirection {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ElectrodeShape {
    Disc {
        center: Point,
        radius: f64,
    },
    Rectangle {
        center: Point,
        width: f64,
        height: f64,
    },
    HalfSlab {
        inner_x: f64,
        center_y: f64,
        thickness: f64,
        direction: SlabDirection,
        extent: f64,
    },
}

/// Axis-aligned box `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Bounds {
    pub fn union(self, o: Bounds) -> Bounds {
        Bounds {
            x0: self.x0.min(o.x0),
            x1: self.x1.max(o.x1),
            y0: self.y0.min(o.y0),
            y1: self.y1.max(o.y1),
        }
    }

    fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    fn distance(&self, p: Point) -> f64 {
        let dx = (self.x0 - p.x).max(p.x - self.x1).max(0.0);
        let dy = (self.y0 - p.y).max(p.y - self.y1).max(0.0);
        dx.hypot(dy)
    }
}

impl ElectrodeShape {
    /// Rectangles and half-slabs as boxes; `None` for discs.
    pub fn as_box(&self) -> Option<Bounds> {
        match *self {
            ElectrodeShape::Disc { .. } => None,
            ElectrodeShape::Rectangle { center, width, height } => Some(Bounds {
                x0: center.x - width / 2.0,
                x1: center.x + width / 2.0,
                y0: center.y - height / 2.0,
                y1: center.y + height / 2.0,
            }),
            ElectrodeShape::HalfSlab { inner_x, center_y, thickness, direction, extent } => {
                let (x0, x1) = match direction {
                    SlabDirection::Right => (inner_x, inner_x + extent),
                    SlabDirection::Left => (inner_x - extent, inner_x),
                };
                Some(Bounds { x0, x1, y0: center_y - thickness / 2.0, y1: center_y + thickness / 2.0 })
            }
        }
    }

    pub fn bounds(&self) -> Bounds {
        match *self {
            ElectrodeShape::Disc { center, radius } => Bounds {
                x0: center.x - radius,
                x1: center.x + radius,
                y0: center.y - radius,
                y1: center.y + radius,
            },
            _ => self.as_box().unwrap(),
        }
    }

    /// Closed containment: boundary points count as inside.
    pub fn contains(&self, p: Point) -> bool {
        match *self {
            ElectrodeShape::Disc { center, radius } => p.dist(center) <= radius,
            _ => self.as_box().unwrap().contains(p),
        }
    }

    /// Euclidean distance from `p` to the shape, zero inside.
    pub fn distance(&self, p: Point) -> f64 {
        match *self {
            ElectrodeShape::Disc { center, radius } => (p.dist(center) - radius).max(0.0),
            _ => self.as_box().unwrap().distance(p),
        }
    }

    /// Smallest dimension; thickness for slabs, diameter for discs.
    pub fn min_dimension(&self) -> f64 {
        match *self {
            ElectrodeShape::Disc { radius, .. } => 2.0 * radius,
            ElectrodeShape::Rectangle { width, height, .. } => width.min(height),
            ElectrodeShape::HalfSlab { thickness, .. } => thickness,
        }
    }

    /// Fraction `t` in `[0, 1]` along `a → b` where the segment first touches
    /// the shape, or `None` if it misses.
    pub fn segment_crossing(&self, a: Point, b: Point) -> Option<f64> {
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        match *self {
            ElectrodeShape::Disc { center, radius } => {
                let (fx, fy) = (a.x - center.x, a.y - center.y);
                let qa = dx * dx + dy * dy;
                let qb = 2.0 * (fx * dx + fy * dy);
                let qc = fx * fx + fy * fy - radius * radius;
                if qc <= 0.0 {
                    return Some(0.0);
                }
                let disc = qb * qb - 4.0 * qa * qc;
                if disc < 0.0 || qa == 0.0 {
                    return None;
                }
                let t = (-qb - disc.sqrt()) / (2.0 * qa);
                (0.0..=1.0).contains(&t).then_some(t)
            }
            _ => {
                let bx = self.as_box().unwrap();
                let mut t0: f64 = 0.0;
                let mut t1: f64 = 1.0;
                for (p, d, lo, hi) in [(a.x, dx, bx.x0, bx.x1), (a.y, dy, bx.y0, bx.y1)] {
                    if d == 0.0 {
                        if p < lo || p > hi {
                            return None;
                        }
                    } else {
                        let (mut u0, mut u1) = ((lo - p) / d, (hi - p) / d);
                        if u0 > u1 {
                            std::mem::swap(&mut u0, &mut u1);
                        }
                        t0 = t0.max(u0);
                        t1 = t1.min(u1);
                    }
                }
                (t0 <= t1).then_some(t0)
            }
        }
    }

    pub fn overlaps(&self, other: &ElectrodeShape) -> bool {
        use ElectrodeShape::Disc;
        match (self, other) {
            (Disc { center: c1, radius: r1 }, Disc { center: c2, radius: r2 }) => c1.dist(*c2) <= r1 + r2,
            (Disc { center, radius }, s) | (s, Disc { center, radius }) => s.distance(*center) <= *radius,
            (a, b) => {
                let (a, b) = (a.as_box().unwrap(), b.as_box().unwrap());
                a.x0 <= b.x1 && b.x0 <= a.x1 && a.y0 <= b.y1 && b.y0 <= a.y1
            }
        }
    }

    pub fn scaled(&self, k: f64) -> ElectrodeShape {
        let sp = |p: Point| Point::new(p.x * k, p.y * k);
        match *self {
            ElectrodeShape::Disc { center, radius } => ElectrodeShape::Disc { center: sp(center), radius: radius * k },
            ElectrodeShape::Rectangle { center, width, height } => ElectrodeShape::Rectangle {
                center: sp(center),
                width: width * k,
                height: height * k,
            },
            ElectrodeShape::HalfSlab { inner_x, center_y, thickness, direction, extent } => ElectrodeShape::HalfSlab {
                inner_x: inner_x * k,
                center_y: center_y * k,
                thickness: thickness * k,
                direction,
                extent: extent * k,
            },
        }
    }

    fn dimensions(&self) -> Vec<(&'static str, f64)> {
        match *self {
            ElectrodeShape::Disc { radius, .. } => vec![("radius", radius)],
            ElectrodeShape::Rectangle { width, height, .. } => vec![("width", width), ("height", height)],
            ElectrodeShape::HalfSlab { thickness, extent, .. } => vec![("thickness", thickness), ("extent", extent)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Rf,
    Control(usize),
    Ground,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Electrode {
    pub name: String,
    pub shape: ElectrodeShape,
    pub role: Role,
}

impl Electrode {
    pub fn new(name: impl Into<String>, shape: ElectrodeShape, role: Role) -> Self {
        Electrode { name: name.into(), shape, role }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("electrode `{0}`: {1} must be positive and finite (got {2})")]
    BadDimension(String, &'static str, f64),
    #[error("electrode `{0}`: half-slab extent {1} m is shorter than {MIN_SLAB_EXTENT_D}·d = {2} m")]
    SlabTooShort(String, f64, f64),
    #[error("electrodes `{0}` and `{1}` overlap")]
    Overlap(String, String),
    #[error("control indices must be contiguous from 0; found {0:?}")]
    ControlIndices(Vec<usize>),
    #[error("geometry needs at least two electrodes")]
    TooFewElectrodes,
    #[error("geometry needs at least one RF electrode")]
    NoRf,
    #[error("geometry needs at least one electrode that is not RF")]
    NoStatic,
    #[error("characteristic length d must be positive (got {0})")]
    BadD(f64),
    #[error("duplicate electrode name `{0}`")]
    DuplicateName(String),
    #[error("scale factor must be positive (got {0})")]
    BadScale(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionGeometry {
    pub label: String,
    /// Distance from the intended trap axis to the nearest electrode surface.
    pub d: f64,
    pub electrodes: Vec<Electrode>,
    /// Top surface of a dielectric substrate, if any; the region below is
    /// excluded from trap searches and may carry ε > 1.
    pub substrate_y: Option<f64>,
    /// Approximate intended trap location, used to pick among several RF nulls.
    pub trap_hint: Option<Point>,
}

impl CrossSectionGeometry {
    pub fn new(label: impl Into<String>, d: f64, electrodes: Vec<Electrode>) -> Result<Self, GeometryError> {
        let g = CrossSectionGeometry { label: label.into(), d, electrodes, substrate_y: None, trap_hint: None };
        g.validate()?;
        Ok(g)
    }

    pub fn with_substrate(mut self, y: f64) -> Self {
        self.substrate_y = Some(y);
        self
    }

    pub fn with_hint(mut self, p: Point) -> Self {
        self.trap_hint = Some(p);
        self
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(GeometryError::BadD(self.d));
        }
        if self.electrodes.len() < 2 {
            return Err(GeometryError::TooFewElectrodes);
        }
        for (i, e) in self.electrodes.iter().enumerate() {
            if self.electrodes[..i].iter().any(|o| o.name == e.name) {
                return Err(GeometryError::DuplicateName(e.name.clone()));
            }
            for (what, v) in e.shape.dimensions() {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(GeometryError::BadDimension(e.name.clone(), what, v));
                }
            }
            if let ElectrodeShape::HalfSlab { extent, .. } = e.shape {
                // small slack so that scaled geometries still pass
                if extent < MIN_SLAB_EXTENT_D * self.d * (1.0 - 1e-9) {
                    return Err(GeometryError::SlabTooShort(e.name.clone(), extent, MIN_SLAB_EXTENT_D * self.d));
                }
            }
        }
        for (i, a) in self.electrodes.iter().enumerate() {
            for b in &self.electrodes[i + 1..] {
                if a.shape.overlaps(&b.shape) {
                    return Err(GeometryError::Overlap(a.name.clone(), b.name.clone()));
                }
            }
        }
        if !self.electrodes.iter().any(|e| e.role == Role::Rf) {
            return Err(GeometryError::NoRf);
        }
        if self.electrodes.iter().all(|e| e.role == Role::Rf) {
            return Err(GeometryError::NoStatic);
        }
        let mut idx: Vec<usize> = self
            .electrodes
            .iter()
            .filter_map(|e| match e.role {
                Role::Control(i) => Some(i),
                _ => None,
            })
            .collect();
        idx.sort_unstable();
        idx.dedup();
        if idx.iter().enumerate().any(|(k, &i)| k != i) {
            return Err(GeometryError::ControlIndices(idx));
        }
        Ok(())
    }

    /// Number of distinct control indices.
    pub fn control_count(&self) -> usize {
        self.electrodes
            .iter()
            .filter_map(|e| match e.role {
                Role::Control(i) => Some(i + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn rf_indices(&self) -> Vec<usize> {
        (0..self.electrodes.len()).filter(|&i| self.electrodes[i].role == Role::Rf).collect()
    }

    pub fn bounds(&self) -> Bounds {
        self.electrodes.iter().map(|e| e.shape.bounds()).reduce(Bounds::union).unwrap()
    }

    /// Distance from `p` to the nearest electrode surface and that electrode's index.
    pub fn nearest_electrode(&self, p: Point) -> (f64, usize) {
        self.electrodes
            .iter()
            .enumerate()
            .map(|(i, e)| (e.shape.distance(p), i))
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
    }

    pub fn min_feature(&self) -> f64 {
        self.electrodes.iter().map(|e| e.shape.min_dimension()).fold(f64::INFINITY, f64::min)
    }

    /// SHA-256 of the serialized spec file, hex encoded.
    pub fn hash(&self) -> String {
        let text = serialize_spec_file(self);
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Multiplies every coordinate and length, including `d`, by `factor`.
pub fn scale_geometry(g: &CrossSectionGeometry, factor: f64) -> Result<CrossSectionGeometry, GeometryError> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(GeometryError::BadScale(factor));
    }
    Ok(CrossSectionGeometry {
        label: g.label.clone(),
        d: g.d * factor,
        electrodes: g
            .electrodes
            .iter()
            .map(|e| Electrode { name: e.name.clone(), shape: e.shape.scaled(factor), role: e.role })
            .collect(),
        substrate_y: g.substrate_y.map(|y| y * factor),
        trap_hint: g.trap_hint.map(|p| Point::new(p.x * factor, p.y * factor)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    /// Peak RF amplitude (V).
    pub v0: f64,
    /// Drive angular frequency (rad/s).
    pub omega: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("RF amplitude must be positive (got {0} V)")]
    BadAmplitude(f64),
    #[error("drive frequency must be positive (got {0} rad/s)")]
    BadOmega(f64),
    #[error("mass must be positive (got {0} kg)")]
    BadMass(f64),
    #[error("charge must be nonzero")]
    ZeroCharge,
    #[error("control index {0} is not present in the geometry")]
    UnknownControl(usize),
}

impl DriveConfig {
    pub fn new(v0: f64, omega: f64) -> Result<Self, ConfigError> {
        if !(v0 > 0.0 && v0.is_finite()) {
            return Err(ConfigError::BadAmplitude(v0));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(ConfigError::BadOmega(omega));
        }
        Ok(DriveConfig { v0, omega })
    }
}

/// Static voltages on control electrodes; missing indices read as 0 V.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StaticConfig {
    pub control_voltages: BTreeMap<usize, f64>,
}

impl StaticConfig {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn uniform(g: &CrossSectionGeometry, v: f64) -> Self {
        StaticConfig { control_voltages: (0..g.control_count()).map(|i| (i, v)).collect() }
    }

    pub fn set(mut self, index: usize, v: f64) -> Self {
        self.control_voltages.insert(index, v);
        self
    }

    pub fn voltage(&self, index: usize) -> f64 {
        self.control_voltages.get(&index).copied().unwrap_or(0.0)
    }

    pub fn check(&self, g: &CrossSectionGeometry) -> Result<(), ConfigError> {
        let n = g.control_count();
        match self.control_voltages.keys().find(|&&i| i >= n) {
            Some(&i) => Err(ConfigError::UnknownControl(i)),
            None => Ok(()),
        }
    }

    /// Per-electrode voltages for the static problem (RF and ground at 0 V).
    pub fn electrode_voltages(&self, g: &CrossSectionGeometry) -> Vec<f64> {
        g.electrodes
            .iter()
            .map(|e| match e.role {
                Role::Control(i) => self.voltage(i),
                _ => 0.0,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Species {
    /// kg
    pub mass: f64,
    /// C
    pub charge: f64,
}

impl Species {
    pub fn new(mass: f64, charge: f64) -> Result<Self, ConfigError> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(ConfigError::BadMass(mass));
        }
        if charge == 0.0 || !charge.is_finite() {
            return Err(ConfigError::ZeroCharge);
        }
        Ok(Species { mass, charge })
    }

    /// Singly charged ion of the given mass in atomic mass units.
    pub fn ion(mass_u: f64) -> Self {
        Species { mass: mass_u * crate::units::ATOMIC_MASS_UNIT, charge: crate::units::ELEMENTARY_CHARGE }
    }
}

/// RF electrodes at `v0`, everything else at 0 V.
pub fn rf_voltages(g: &CrossSectionGeometry, v0: f64) -> Vec<f64> {
    g.electrodes.iter().map(|e| if e.role == Role::Rf { v0 } else { 0.0 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x: f64, y: f64, w: f64, h: f64) -> ElectrodeShape {
        ElectrodeShape::Rectangle { center: Point::new(x, y), width: w, height: h }
    }

    #[test]
    fn box_crossing_from_outside() {
        let r = rect(1.0, 0.0, 1.0, 1.0);
        let t = r.segment_crossing(Point::new(0.0, 0.0), Point::new(1.0, 0.0)).unwrap();
        assert!((t - 0.5).abs() < 1e-15);
        assert!(r.segment_crossing(Point::new(0.0, 2.0), Point::new(1.0, 2.0)).is_none());
    }

    #[test]
    fn disc_crossing() {
        let c = ElectrodeShape::Disc { center: Point::new(0.0, 0.0), radius: 0.5 };
        let t = c.segment_crossing(Point::new(-1.0, 0.0), Point::new(0.0, 0.0)).unwrap();
        assert!((t - 0.5).abs() < 1e-15);
        assert!(c.segment_crossing(Point::new(-2.0, 0.0), Point::new(-1.0, 0.0)).is_none());
    }

    #[test]
    fn overlap_detection() {
        let a = rect(0.0, 0.0, 1.0, 1.0);
        let b = rect(0.9, 0.0, 1.0, 1.0);
        let c = rect(2.0, 0.0, 1.0, 1.0);
        assert!(a.overlaps(&b));
        assert!(!a.overlaps(&c));
        let disc = ElectrodeShape::Disc { center: Point::new(0.0, 0.8), radius: 0.35 };
        assert!(a.overlaps(&disc));
    }

    #[test]
    fn validation_names_electrodes() {
        let e = vec![
            Electrode::new("a", rect(0.0, 0.0, 1.0, 1.0), Role::Rf),
            Electrode::new("b", rect(0.5, 0.0, 1.0, 1.0), Role::Ground),
        ];
        let err = CrossSectionGeometry::new("x", 1.0, e).unwrap_err();
        assert_eq!(err, GeometryError::Overlap("a".into(), "b".into()));
    }
}
