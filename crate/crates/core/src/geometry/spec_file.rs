//! Line-oriented geometry documents.
//!
//! ```text
//! [trap]
//! label = five-wire
//! d = 50um
//! substrate_y = -5um        # optional
//! hint = 0um, 50um          # optional
//!
//! [electrode]
//! name = rf-left
//! role = rf                 # rf | ground | control <index>
//! shape = rectangle         # disc | rectangle | half_slab
//! center = -60um, -2.5um
//! width = 52.5um
//! height = 5um
//! ```
//!
//! Discs take `center` and `radius`; half slabs take `inner_x`, `center_y`,
//! `thickness`, `direction` (left|right) and `extent`. Serialization writes
//! metres using the shortest round-trip decimal form.

use super::{CrossSectionGeometry, Electrode, ElectrodeShape, GeometryError, Point, Role, SlabDirection};
use crate::units::{parse_quantity, Dimension};
use std::collections::HashMap;
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpecError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{0}")]
    Geometry(#[from] GeometryError),
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError::Syntax { line, msg: msg.into() })
}

struct Section {
    kind: String,
    line: usize,
    entries: HashMap<String, (String, usize)>,
}

impl Section {
    fn take(&mut self, key: &str) -> Result<(String, usize), SpecError> {
        match self.entries.remove(key) {
            Some(v) => Ok(v),
            None => err(self.line, format!("[{}] section is missing `{key}`", self.kind)),
        }
    }

    fn take_opt(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    fn length(&mut self, key: &str) -> Result<f64, SpecError> {
        let (v, line) = self.take(key)?;
        length(&v, line, key)
    }

    fn point(&mut self, key: &str) -> Result<Point, SpecError> {
        let (v, line) = self.take(key)?;
        point(&v, line, key)
    }

    fn finish(self) -> Result<(), SpecError> {
        let mut left: Vec<_> = self.entries.into_iter().collect();
        left.sort_by_key(|(_, (_, l))| *l);
        match left.first() {
            Some((k, (_, l))) => err(*l, format!("unknown key `{k}` in [{}] section", self.kind)),
            None => Ok(()),
        }
    }
}

fn length(v: &str, line: usize, key: &str) -> Result<f64, SpecError> {
    parse_quantity(v, Dimension::Length).or_else(|e| err(line, format!("`{key}`: {e}")))
}

fn point(v: &str, line: usize, key: &str) -> Result<Point, SpecError> {
    let parts: Vec<&str> = v.split(',').collect();
    if parts.len() != 2 {
        return err(line, format!("`{key}` expects two comma-separated lengths"));
    }
    Ok(Point::new(length(parts[0], line, key)?, length(parts[1], line, key)?))
}

fn parse_role(v: &str, line: usize) -> Result<Role, SpecError> {
    let words: Vec<&str> = v.split_whitespace().collect();
    match words.as_slice() {
        ["rf"] => Ok(Role::Rf),
        ["ground"] => Ok(Role::Ground),
        ["control", i] => match i.parse::<usize>() {
            Ok(i) => Ok(Role::Control(i)),
            Err(_) => err(line, format!("control index `{i}` is not a non-negative integer")),
        },
        _ => err(line, format!("unknown role `{v}`; expected rf, ground or control <index>")),
    }
}

pub fn parse_spec_file(text: &str) -> Result<CrossSectionGeometry, SpecError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if name != "trap" && name != "electrode" {
                return err(line, format!("unknown section [{name}]"));
            }
            sections.push(Section { kind: name.to_string(), line, entries: HashMap::new() });
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return err(line, "expected `key = value`");
        };
        let Some(sec) = sections.last_mut() else {
            return err(line, "key outside of any section");
        };
        let key = k.trim().to_string();
        if sec.entries.contains_key(&key) {
            return err(line, format!("duplicate key `{key}`"));
        }
        sec.entries.insert(key, (v.trim().to_string(), line));
    }

    let mut trap = None;
    let mut electrodes = Vec::new();
    for mut sec in sections {
        if sec.kind == "trap" {
            if trap.is_some() {
                return err(sec.line, "more than one [trap] section");
            }
            let label = sec.take("label")?.0;
            let d = sec.length("d")?;
            let substrate = match sec.take_opt("substrate_y") {
                Some((v, l)) => Some(length(&v, l, "substrate_y")?),
                None => None,
            };
            let hint = match sec.take_opt("hint") {
                Some((v, l)) => Some(point(&v, l, "hint")?),
                None => None,
            };
            sec.finish()?;
            trap = Some((label, d, substrate, hint));
        } else {
            let name = sec.take("name")?.0;
            let (rv, rl) = sec.take("role")?;
            let role = parse_role(&rv, rl)?;
            let (sv, sl) = sec.take("shape")?;
            let shape = match sv.as_str() {
                "disc" => ElectrodeShape::Disc { center: sec.point("center")?, radius: sec.length("radius")? },
                "rectangle" => ElectrodeShape::Rectangle {
                    center: sec.point("center")?,
                    width: sec.length("width")?,
                    height: sec.length("height")?,
                },
                "half_slab" => {
                    let inner_x = sec.length("inner_x")?;
                    let center_y = sec.length("center_y")?;
                    let thickness = sec.length("thickness")?;
                    let (dv, dl) = sec.take("direction")?;
                    let direction = match dv.as_str() {
                        "left" => SlabDirection::Left,
                        "right" => SlabDirection::Right,
                        _ => return err(dl, format!("direction `{dv}` must be left or right")),
                    };
                    let extent = sec.length("extent")?;
                    ElectrodeShape::HalfSlab { inner_x, center_y, thickness, direction, extent }
                }
                _ => return err(sl, format!("unknown shape `{sv}`; expected disc, rectangle or half_slab")),
            };
            sec.finish()?;
            electrodes.push(Electrode { name, shape, role });
        }
    }
    let Some((label, d, substrate_y, trap_hint)) = trap else {
        return err(0, "missing [trap] section");
    };
    let g = CrossSectionGeometry { label, d, electrodes, substrate_y, trap_hint };
    g.validate()?;
    Ok(g)
}

fn m(v: f64) -> String {
    format!("{v}m")
}

fn pt(p: Point) -> String {
    format!("{}, {}", m(p.x), m(p.y))
}

pub fn serialize_spec_file(g: &CrossSectionGeometry) -> String {
    let mut s = String::new();
    s.push_str("[trap]\n");
    writeln!(s, "label = {}", g.label).unwrap();
    writeln!(s, "d = {}", m(g.d)).unwrap();
    if let Some(y) = g.substrate_y {
        writeln!(s, "substrate_y = {}", m(y)).unwrap();
    }
    if let Some(p) = g.trap_hint {
        writeln!(s, "hint = {}", pt(p)).unwrap();
    }
    for e in &g.electrodes {
        s.push_str("\n[electrode]\n");
        writeln!(s, "name = {}", e.name).unwrap();
        let role = match e.role {
            Role::Rf => "rf".to_string(),
            Role::Ground => "ground".to_string(),
            Role::Control(i) => format!("control {i}"),
        };
        writeln!(s, "role = {role}").unwrap();
        match e.shape {
            ElectrodeShape::Disc { center, radius } => {
                s.push_str("shape = disc\n");
                writeln!(s, "center = {}", pt(center)).unwrap();
                writeln!(s, "radius = {}", m(radius)).unwrap();
            }
            ElectrodeShape::Rectangle { center, width, height } => {
                s.push_str("shape = rectangle\n");
                writeln!(s, "center = {}", pt(center)).unwrap();
                writeln!(s, "width = {}", m(width)).unwrap();
                writeln!(s, "height = {}", m(height)).unwrap();
            }
            ElectrodeShape::HalfSlab { inner_x, center_y, thickness, direction, extent } => {
                s.push_str("shape = half_slab\n");
                writeln!(s, "inner_x = {}", m(inner_x)).unwrap();
                writeln!(s, "center_y = {}", m(center_y)).unwrap();
                writeln!(s, "thickness = {}", m(thickness)).unwrap();
                let dir = match direction {
                    SlabDirection::Left => "left",
                    SlabDirection::Right => "right",
                };
                writeln!(s, "direction = {dir}").unwrap();
                writeln!(s, "extent = {}", m(extent)).unwrap();
            }
        }
    }
    s
}
