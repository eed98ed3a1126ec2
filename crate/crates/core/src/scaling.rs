//! Miniaturization limits of a quadrupole trap at fixed stability parameter,
//! and the distance-scaling regime of motional heating.

use crate::geometry::Species;
use crate::units::{ATOMIC_MASS_UNIT, ELEMENTARY_CHARGE, HBAR};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalingError {
    #[error("q must lie in (0, 0.9), got {0}")]
    BadQ(f64),
    #[error("surface field limit must be positive, got {0} V/m")]
    BadField(f64),
    #[error("geometry factor beta must lie in (0, 1], got {0}")]
    BadBeta(f64),
    #[error("trap radius must be positive, got {0} m")]
    BadRadius(f64),
    #[error("target ratio must be at least 1, got {0}")]
    BadTarget(f64),
    #[error("radius range must be positive and increasing")]
    BadRange,
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("lengths must be positive")]
    BadLength,
    #[error("preset file: {0}")]
    Presets(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingScenario {
    pub species: Species,
    pub q: f64,
    /// Largest tolerable surface field (V/m).
    pub e0: f64,
    pub beta: f64,
}

impl ScalingScenario {
    pub fn new(species: Species, q: f64, e0: f64, beta: f64) -> Result<Self, ScalingError> {
        if !(q > 0.0 && q < 0.9) {
            return Err(ScalingError::BadQ(q));
        }
        if !(e0 > 0.0 && e0.is_finite()) {
            return Err(ScalingError::BadField(e0));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(ScalingError::BadBeta(beta));
        }
        Ok(ScalingScenario { species, q, e0, beta })
    }

    pub fn with_field(self, e0: f64) -> Result<Self, ScalingError> {
        ScalingScenario::new(self.species, self.q, e0, self.beta)
    }

    // sqrt(q·Q·m·E0), shared by the depth/quantum ratio.
    fn root(&self) -> f64 {
        (self.q * self.species.charge * self.species.mass * self.e0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub r: f64,
    pub v0: f64,
    pub omega_drive: f64,
    /// J
    pub u_max: f64,
    pub u_max_ev: f64,
    pub omega_secular: f64,
    /// `U_max / ħω_secular`
    pub quantum_ratio: f64,
}

pub fn evaluate(s: &ScalingScenario, r: f64) -> Result<ScalingPoint, ScalingError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(ScalingError::BadRadius(r));
    }
    let (m, qe) = (s.species.mass, s.species.charge);
    let v0 = s.e0 * r;
    let omega_drive = (2.0 * qe * v0 / (m * s.q * r * r)).sqrt();
    let u_max = s.beta * s.q * qe * s.e0 * r / 8.0;
    let omega_secular = 0.5 * (s.q * qe * s.e0 / (m * r)).sqrt();
    let quantum_ratio = s.beta / (4.0 * HBAR) * s.root() * r.powf(1.5);
    Ok(ScalingPoint { r, v0, omega_drive, u_max, u_max_ev: u_max / ELEMENTARY_CHARGE, omega_secular, quantum_ratio })
}

/// Smallest radius at which `U_max/ħω` reaches `target`.
pub fn min_radius_for_ratio(s: &ScalingScenario, target: f64) -> Result<f64, ScalingError> {
    if !(target >= 1.0 && target.is_finite()) {
        return Err(ScalingError::BadTarget(target));
    }
    Ok((4.0 * HBAR * target / (s.beta * s.root())).powf(2.0 / 3.0))
}

/// One row per (E0, R): `n` radii log-spaced over `[r_lo, r_hi]` for each field.
pub fn scan(s: &ScalingScenario, r_lo: f64, r_hi: f64, n: usize, fields: &[f64]) -> Result<Vec<(f64, ScalingPoint)>, ScalingError> {
    if !(r_lo > 0.0 && r_hi > r_lo && n >= 2) {
        return Err(ScalingError::BadRange);
    }
    let mut rows = Vec::with_capacity(n * fields.len());
    for &e0 in fields {
        let sc = s.with_field(e0)?;
        for k in 0..n {
            let r = r_lo * (r_hi / r_lo).powf(k as f64 / (n - 1) as f64);
            rows.push((e0, evaluate(&sc, r)?));
        }
    }
    Ok(rows)
}

pub fn scan_csv(rows: &[(f64, ScalingPoint)]) -> String {
    let mut s = String::from("e0_v_per_m,r_m,v0_v,omega_drive_rad_s,u_max_j,u_max_ev,depth_hbar_omega,omega_secular_rad_s,f_secular_hz\n");
    for (e0, p) in rows {
        writeln!(
            s,
            "{e0},{},{},{},{},{},{},{},{}",
            p.r,
            p.v0,
            p.omega_drive,
            p.u_max,
            p.u_max_ev,
            p.quantum_ratio,
            p.omega_secular,
            p.omega_secular / (2.0 * std::f64::consts::PI)
        )
        .unwrap();
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatingRegime {
    /// Patches smaller than the distance.
    Patch,
    /// Distance well below the skin depth.
    ThinSkin,
    /// Distance well above the skin depth.
    ThickSkin,
    /// Within a factor 10 of the skin depth.
    Transitional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatingScaling {
    pub regime: HeatingRegime,
    /// `None` in the transitional band.
    pub exponent: Option<i32>,
    /// Exponents bounding the regime (equal outside the transitional band).
    pub bounds: [i32; 2],
    /// The factor-10 band edges are a convention, not a derived value.
    pub conventional_cutoffs: bool,
}

pub fn heating_exponent(d: f64, skin_depth: f64, patch_size: Option<f64>) -> Result<HeatingScaling, ScalingError> {
    let pos = |x: f64| x > 0.0 && x.is_finite();
    if !pos(d) || !pos(skin_depth) || patch_size.is_some_and(|p| !pos(p)) {
        return Err(ScalingError::BadLength);
    }
    let one = |regime, e| HeatingScaling { regime, exponent: Some(e), bounds: [e, e], conventional_cutoffs: true };
    Ok(if patch_size.is_some_and(|p| p < d) {
        one(HeatingRegime::Patch, -4)
    } else if d < skin_depth / 10.0 {
        one(HeatingRegime::ThinSkin, -3)
    } else if d > 10.0 * skin_depth {
        one(HeatingRegime::ThickSkin, -2)
    } else {
        HeatingScaling { regime: HeatingRegime::Transitional, exponent: None, bounds: [-3, -2], conventional_cutoffs: true }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub mass_u: f64,
    pub charge_e: f64,
    pub q: f64,
    pub beta: f64,
    pub e0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetFile {
    pub version: u32,
    pub presets: Vec<Preset>,
}

pub const PRESETS_JSON: &str = include_str!("../data/scaling_presets.json");

pub fn presets() -> PresetFile {
    serde_json::from_str(PRESETS_JSON).expect("embedded presets parse")
}

pub fn parse_presets(text: &str) -> Result<PresetFile, ScalingError> {
    serde_json::from_str(text).map_err(|e| ScalingError::Presets(e.to_string()))
}

impl Preset {
    pub fn scenario(&self) -> Result<ScalingScenario, ScalingError> {
        let species = Species { mass: self.mass_u * ATOMIC_MASS_UNIT, charge: self.charge_e * ELEMENTARY_CHARGE };
        ScalingScenario::new(species, self.q, self.e0, self.beta)
    }
}

pub fn preset(name: &str) -> Result<ScalingScenario, ScalingError> {
    presets()
        .presets
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| ScalingError::UnknownPreset(name.into()))?
        .scenario()
}
