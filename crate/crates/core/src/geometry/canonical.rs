use super::{CrossSectionGeometry, Electrode, ElectrodeShape, GeometryError, Point, Role, SlabDirection};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CanonicalKind {
    FourRod,
    TwoLayer,
    ThreeLayer,
    FourWire,
    FiveWire,
    FiveWireInPlane,
}

impl CanonicalKind {
    pub const ALL: [CanonicalKind; 6] = [
        CanonicalKind::FourRod,
        CanonicalKind::TwoLayer,
        CanonicalKind::ThreeLayer,
        CanonicalKind::FourWire,
        CanonicalKind::FiveWire,
        CanonicalKind::FiveWireInPlane,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CanonicalKind::FourRod => "four-rod",
            CanonicalKind::TwoLayer => "two-layer",
            CanonicalKind::ThreeLayer => "three-layer",
            CanonicalKind::FourWire => "four-wire",
            CanonicalKind::FiveWire => "five-wire",
            CanonicalKind::FiveWireInPlane => "five-wire-in-plane",
        }
    }

    /// Surface geometries sit on a substrate below `y = -thickness`.
    pub fn is_surface(self) -> bool {
        matches!(self, CanonicalKind::FourWire | CanonicalKind::FiveWire)
    }
}

impl fmt::Display for CanonicalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CanonicalKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        CanonicalKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| {
                let names: Vec<_> = CanonicalKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown geometry kind `{s}`; expected one of {}", names.join(", "))
            })
    }
}

/// Parameters for [`build_canonical`]. Lengths in metres; `None` picks the
/// default listed on each field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalParams {
    pub d: f64,
    /// Electrode thickness; default `0.10·d`.
    pub thickness: Option<f64>,
    /// Width/height of the gap region; default 1 (two-layer), 1.8 (three-layer).
    pub gamma: Option<f64>,
    /// Four-rod rod radius; default `1.148·d`.
    pub rod_radius: Option<f64>,
    /// Surface electrode width (and in-plane rail width); default `1.05·d`.
    pub width: Option<f64>,
    /// Inter-electrode gap; default `width/10`.
    pub gap: Option<f64>,
    /// Five-wire only: left RF rail is `width·(1+skew)`, right one `width·(1-skew)`.
    pub rf_skew: f64,
    /// Length of "semi-infinite" plates; default `20·d`.
    pub extent: Option<f64>,
    /// Width of the outermost electrodes (five-wire outer grounds, four-wire
    /// `rf-left` and `control-outer`); default `width`.
    pub outer_width: Option<f64>,
}

/// Surface electrode width that puts the gapless RF null of an equal-width
/// five-wire trap at height `d` with gap = width/10.
pub const DEFAULT_SURFACE_WIDTH_D: f64 = 1.05;
pub const DEFAULT_ROD_RADIUS_D: f64 = 1.148;
pub const DEFAULT_THICKNESS_D: f64 = 0.10;

impl CanonicalParams {
    pub fn new(d: f64) -> Self {
        CanonicalParams {
            d,
            thickness: None,
            gamma: None,
            rod_radius: None,
            width: None,
            gap: None,
            rf_skew: 0.0,
            extent: None,
            outer_width: None,
        }
    }

    pub fn thickness(&self) -> f64 {
        self.thickness.unwrap_or(DEFAULT_THICKNESS_D * self.d)
    }

    pub fn width(&self) -> f64 {
        self.width.unwrap_or(DEFAULT_SURFACE_WIDTH_D * self.d)
    }

    pub fn gap(&self) -> f64 {
        self.gap.unwrap_or(self.width() / 10.0)
    }

    pub fn extent(&self) -> f64 {
        self.extent.unwrap_or(20.0 * self.d)
    }

    pub fn gamma_for(&self, kind: CanonicalKind) -> f64 {
        self.gamma.unwrap_or(if kind == CanonicalKind::ThreeLayer { 1.8 } else { 1.0 })
    }
}

fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> ElectrodeShape {
    ElectrodeShape::Rectangle {
        center: Point::new((x0 + x1) / 2.0, (y0 + y1) / 2.0),
        width: x1 - x0,
        height: y1 - y0,
    }
}

fn slab(inner_x: f64, y0: f64, t: f64, direction: SlabDirection, extent: f64) -> ElectrodeShape {
    ElectrodeShape::HalfSlab { inner_x, center_y: y0 + t / 2.0, thickness: t, direction, extent }
}

pub fn build_canonical(kind: CanonicalKind, p: &CanonicalParams) -> Result<CrossSectionGeometry, GeometryError> {
    let d = p.d;
    if !(d > 0.0 && d.is_finite()) {
        return Err(GeometryError::BadD(d));
    }
    let t = p.thickness();
    let g = match kind {
        CanonicalKind::FourRod => {
            let r = p.rod_radius.unwrap_or(DEFAULT_ROD_RADIUS_D * d);
            let c = (d + r) / std::f64::consts::SQRT_2;
            let rod = |x: f64, y: f64| ElectrodeShape::Disc { center: Point::new(x * c, y * c), radius: r };
            CrossSectionGeometry::new(
                kind.name(),
                d,
                vec![
                    Electrode::new("rf-upper-left", rod(-1.0, 1.0), Role::Rf),
                    Electrode::new("control-upper-right", rod(1.0, 1.0), Role::Control(0)),
                    Electrode::new("rf-lower-right", rod(1.0, -1.0), Role::Rf),
                    Electrode::new("control-lower-left", rod(-1.0, -1.0), Role::Control(1)),
                ],
            )?
            .with_hint(Point::new(0.0, 0.0))
        }
        CanonicalKind::TwoLayer => {
            let gamma = p.gamma_for(kind);
            let h = 2.0 * d / (1.0 + gamma * gamma).sqrt();
            let w = gamma * h;
            let ext = p.extent();
            use SlabDirection::{Left, Right};
            CrossSectionGeometry::new(
                kind.name(),
                d,
                vec![
                    Electrode::new("rf-upper-left", slab(-w / 2.0, h / 2.0, t, Left, ext), Role::Rf),
                    Electrode::new("control-upper-right", slab(w / 2.0, h / 2.0, t, Right, ext), Role::Control(0)),
                    Electrode::new("rf-lower-right", slab(w / 2.0, -h / 2.0 - t, t, Right, ext), Role::Rf),
                    Electrode::new("control-lower-left", slab(-w / 2.0, -h / 2.0 - t, t, Left, ext), Role::Control(1)),
                ],
            )?
            .with_hint(Point::new(0.0, 0.0))
        }
        CanonicalKind::ThreeLayer => {
            let gamma = p.gamma_for(kind);
            let w = 2.0 * d;
            let h = w / gamma;
            let ext = p.extent();
            use SlabDirection::{Left, Right};
            CrossSectionGeometry::new(
                kind.name(),
                d,
                vec![
                    Electrode::new("control-top-left", slab(-w / 2.0, h / 2.0, t, Left, ext), Role::Control(0)),
                    Electrode::new("control-top-right", slab(w / 2.0, h / 2.0, t, Right, ext), Role::Control(1)),
                    Electrode::new("rf-left", slab(-w / 2.0, -t / 2.0, t, Left, ext), Role::Rf),
                    Electrode::new("rf-right", slab(w / 2.0, -t / 2.0, t, Right, ext), Role::Rf),
                    Electrode::new("control-bottom-left", slab(-w / 2.0, -h / 2.0 - t, t, Left, ext), Role::Control(2)),
                    Electrode::new("control-bottom-right", slab(w / 2.0, -h / 2.0 - t, t, Right, ext), Role::Control(3)),
                ],
            )?
            .with_hint(Point::new(0.0, 0.0))
        }
        CanonicalKind::FiveWire => {
            let (w, gap) = (p.width(), p.gap());
            let wl = w * (1.0 + p.rf_skew);
            let wr = w * (1.0 - p.rf_skew);
            let c0 = w / 2.0;
            let l1 = -c0 - gap;
            let l0 = l1 - wl;
            let r0 = c0 + gap;
            let r1 = r0 + wr;
            let wo = p.outer_width.unwrap_or(w);
            CrossSectionGeometry::new(
                kind.name(),
                d,
                vec![
                    Electrode::new("outer-left", rect(l0 - gap - wo, l0 - gap, -t, 0.0), Role::Control(1)),
                    Electrode::new("rf-left", rect(l0, l1, -t, 0.0), Role::Rf),
                    Electrode::new("center", rect(-c0, c0, -t, 0.0), Role::Control(0)),
                    Electrode::new("rf-right", rect(r0, r1, -t, 0.0), Role::Rf),
                    Electrode::new("outer-right", rect(r1 + gap, r1 + gap + wo, -t, 0.0), Role::Control(2)),
                ],
            )?
            .with_substrate(-t)
            .with_hint(Point::new(0.0, d))
        }
        CanonicalKind::FourWire => {
            let (w, gap) = (p.width(), p.gap());
            let c0 = w / 2.0;
            let wo = p.outer_width.unwrap_or(w);
            CrossSectionGeometry::new(
                kind.name(),
                d,
                vec![
                    Electrode::new("rf-left", rect(-c0 - gap - wo, -c0 - gap, -t, 0.0), Role::Rf),
                    Electrode::new("control-inner", rect(-c0, c0, -t, 0.0), Role::Control(0)),
                    Electrode::new("rf-right", rect(c0 + gap, c0 + gap + w, -t, 0.0), Role::Rf),
                    Electrode::new(
                        "control-outer",
                        rect(c0 + 2.0 * gap + w, c0 + 2.0 * gap + w + wo, -t, 0.0),
                        Role::Control(1),
                    ),
                ],
            )?
            .with_substrate(-t)
            .with_hint(Point::new(0.0, d))
        }
        CanonicalKind::FiveWireInPlane => {
            let (w, gap) = (p.width(), p.gap());
            let (y0, y1) = (-t / 2.0, t / 2.0);
            CrossSectionGeometry::new(
                kind.name(),
                d,
                vec![
                    Electrode::new("ground-left", rect(-d - w - gap - w, -d - w - gap, y0, y1), Role::Ground),
                    Electrode::new("rf-left", rect(-d - w, -d, y0, y1), Role::Rf),
                    Electrode::new("rf-right", rect(d, d + w, y0, y1), Role::Rf),
                    Electrode::new("ground-right", rect(d + w + gap, d + w + gap + w, y0, y1), Role::Ground),
                ],
            )?
            .with_hint(Point::new(0.0, 0.0))
        }
    };
    Ok(g)
}
